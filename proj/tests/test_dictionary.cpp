#include <doctest.h>

#include <cmath>
#include <random>

#include "koopman/dictionary.hpp"
#include "koopman/errors.hpp"

using namespace koopman;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("evaluate: constant, coordinates, thin-plate center, monomial") {
    Dictionary constant(2, {basis::Constant{}});
    CHECK(constant.evaluate(vec({7.5, -3.0}))[0] == 1.0);

    Dictionary coords(2, {basis::Coordinate{0}, basis::Coordinate{1}});
    const Eigen::VectorXd c = coords.evaluate(vec({3.0, -2.0}));
    CHECK(c[0] == 3.0);
    CHECK(c[1] == -2.0);

    Dictionary tps(2, {basis::ThinPlateSpline{vec({1.0, 0.0})}});
    CHECK(tps.evaluate(vec({1.0, 0.0}))[0] == 0.0);

    Dictionary mono(2, {basis::Monomial{{2, 1}}});
    CHECK(mono.evaluate(vec({2.0, 3.0}))[0] == 12.0);
}

TEST_CASE("thin-plate spline matches r^2 log r and vanishes continuously at the center") {
    Dictionary tps(1, {basis::ThinPlateSpline{vec({0.5})}});
    const double r = 2.0;
    CHECK(tps.evaluate(vec({0.5 + r}))[0] == doctest::Approx(r * r * std::log(r)).epsilon(1e-15));
    for (double eps : {1e-3, 1e-6, 1e-9}) CHECK(std::abs(tps.evaluate(vec({0.5 + eps}))[0]) <= 10 * eps);
}

TEST_CASE("gaussian rbf and affine output") {
    Dictionary d(2, {basis::GaussianRbf{vec({0.0, 0.0}), 2.0}, basis::AffineOutput{vec({1.0, -1.0})}});
    const Eigen::VectorXd v = d.evaluate(vec({1.0, 1.0}));
    CHECK(v[0] == doctest::Approx(std::exp(-2.0 / 8.0)));
    CHECK(v[1] == 0.0);
}

TEST_CASE("evaluate_matrix examples") {
    Dictionary constant(1, {basis::Constant{}});
    Eigen::MatrixXd X(3, 1);
    X << 0.3, -4.0, 11.0;
    CHECK(constant.evaluate_matrix(X) == Eigen::MatrixXd::Ones(3, 1));

    Dictionary coords(2, {basis::Coordinate{0}, basis::Coordinate{1}});
    CHECK(coords.evaluate_matrix(Eigen::MatrixXd::Identity(2, 2)) == Eigen::MatrixXd::Identity(2, 2));

    Dictionary vander(1, {basis::Constant{}, basis::Monomial{{1}}, basis::Monomial{{2}}});
    Eigen::MatrixXd pts(3, 1);
    pts << 0, 1, 2;
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 0, 0, 1, 1, 1, 1, 2, 4;
    CHECK(vander.evaluate_matrix(pts) == expected);
}

TEST_CASE("evaluate_matrix stacks individual evaluations and is deterministic") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    Dictionary d(3, {basis::Constant{}, basis::Monomial{{1, 2, 0}}, basis::GaussianRbf{vec({0.1, 0.2, 0.3}), 0.7},
                     basis::ThinPlateSpline{vec({-1.0, 0.0, 1.0})}, basis::AffineOutput{vec({0.5, 0.25, -2.0})}});
    Eigen::MatrixXd X(25, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
    const Eigen::MatrixXd M = d.evaluate_matrix(X);
    for (Eigen::Index k = 0; k < X.rows(); ++k) CHECK(M.row(k) == d.evaluate(X.row(k).transpose()).transpose());
    CHECK(d.evaluate_matrix(X) == M);
}

TEST_CASE("shape and configuration errors") {
    Dictionary coords(2, {basis::Coordinate{0}, basis::Coordinate{1}});
    CHECK_THROWS_AS(coords.evaluate(vec({1.0, 2.0, 3.0})), InputShapeError);
    CHECK_THROWS_AS(coords.evaluate_matrix(Eigen::MatrixXd::Zero(4, 3)), InputShapeError);

    CHECK_THROWS_AS(Dictionary(2, {}), ConfigurationError);
    CHECK_THROWS_AS(Dictionary(2, {basis::Coordinate{2}}), ConfigurationError);
    CHECK_THROWS_AS(Dictionary(2, {basis::GaussianRbf{vec({0.0, 0.0}), 0.0}}), ConfigurationError);
    CHECK_THROWS_AS(Dictionary(2, {basis::GaussianRbf{vec({0.0}), 1.0}}), ConfigurationError);
    CHECK_THROWS_AS(Dictionary(2, {basis::AffineOutput{vec({1.0})}}), ConfigurationError);
    CHECK_THROWS_AS(Dictionary(2, {basis::Monomial{{1}}}), ConfigurationError);
}

TEST_CASE("graded lexicographic exponents") {
    const auto e = graded_lex_exponents(2, 2);
    const std::vector<std::vector<unsigned>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(e == expected);
    // (d + n choose n) tuples up to degree d
    CHECK(graded_lex_exponents(3, 4).size() == 35);
    CHECK(graded_lex_exponents(2, 4).size() == 15);
}

TEST_CASE("make_standard_dictionary ordering") {
    {
        DictionarySpec spec;
        spec.state_dim = 2;
        spec.include_state = true;
        const Dictionary d = make_standard_dictionary(spec);
        REQUIRE(d.size() == 2);
        CHECK(std::get<basis::Coordinate>(d.basis()[0]).index == 0);
        CHECK(std::get<basis::Coordinate>(d.basis()[1]).index == 1);
    }
    {
        DictionarySpec spec;
        spec.state_dim = 1;
        spec.monomial_degree = 2;
        const Dictionary d = make_standard_dictionary(spec);
        REQUIRE(d.size() == 3);
        CHECK(std::holds_alternative<basis::Constant>(d.basis()[0]));
        CHECK(std::get<basis::Monomial>(d.basis()[1]).exponents == std::vector<unsigned>{1});
        CHECK(std::get<basis::Monomial>(d.basis()[2]).exponents == std::vector<unsigned>{2});
    }
    {
        DictionarySpec spec;
        spec.state_dim = 2;
        spec.include_state = true;
        spec.rbf_centers = {vec({0.0, 0.0})};
        spec.rbf_bandwidth = 1.0;
        const Dictionary d = make_standard_dictionary(spec);
        REQUIRE(d.size() == 3);
        CHECK(std::holds_alternative<basis::Coordinate>(d.basis()[0]));
        CHECK(std::holds_alternative<basis::Coordinate>(d.basis()[1]));
        CHECK(std::holds_alternative<basis::GaussianRbf>(d.basis()[2]));
    }
    {
        // output guesses first, degree-1 monomials dropped when coordinates are present
        DictionarySpec spec;
        spec.state_dim = 2;
        spec.include_state = true;
        spec.monomial_degree = 2;
        spec.output_guess_rows = {vec({1.0, 1.0})};
        const Dictionary d = make_standard_dictionary(spec);
        REQUIRE(d.size() == 1 + 2 + 1 + 3);
        CHECK(std::holds_alternative<basis::AffineOutput>(d.basis()[0]));
        CHECK(std::holds_alternative<basis::Constant>(d.basis()[3]));
        CHECK(std::get<basis::Monomial>(d.basis()[4]).exponents == std::vector<unsigned>{2, 0});
    }
    CHECK_THROWS_AS(make_standard_dictionary(DictionarySpec{2}), ConfigurationError);
}

TEST_CASE("rbf centers lie in the data bounding box and depend only on the seed") {
    Eigen::MatrixXd X(4, 2);
    X << 0, -1, 2, 3, 1, 0, -0.5, 1;
    const auto a = sample_rbf_centers(X, 20, 5);
    const auto b = sample_rbf_centers(X, 20, 5);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i][0] >= -0.5);
        CHECK(a[i][0] <= 2.0);
        CHECK(a[i][1] >= -1.0);
        CHECK(a[i][1] <= 3.0);
    }
    CHECK(sample_rbf_centers(X, 1, 6)[0] != a[0]);
}
