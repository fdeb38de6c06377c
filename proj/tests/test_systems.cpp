#include <doctest.h>

#include <array>
#include <cmath>

#include "koopman/errors.hpp"
#include "koopman/systems.hpp"

using namespace koopman;

namespace {

// Independent classical RK4 on plain arrays.
template <class F>
std::array<double, 2> rk4(F f, std::array<double, 2> x, double h) {
    auto add = [](std::array<double, 2> a, std::array<double, 2> b, double s) {
        return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
    };
    const auto k1 = f(x);
    const auto k2 = f(add(x, k1, h / 2));
    const auto k3 = f(add(x, k2, h / 2));
    const auto k4 = f(add(x, k3, h));
    return {x[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            x[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

}  // namespace

TEST_CASE("single steps") {
    const ReferenceSystem identity{system::Linear{Eigen::Matrix2d::Identity()}};
    CHECK(step(identity, Eigen::Vector2d(3.5, -1.0)) == Eigen::Vector2d(3.5, -1.0));

    const ReferenceSystem half{system::ScalarPoly{{0.0, 0.5}}};
    CHECK(step(half, Eigen::VectorXd::Constant(1, 2.0))[0] == 1.0);

    const ReferenceSystem logistic{system::ScalarPoly{{0.0, 1.0, 1.0}}};
    CHECK(step(logistic, Eigen::VectorXd::Constant(1, 0.3))[0] == doctest::Approx(0.39).epsilon(1e-15));

    const ReferenceSystem rot{system::Rotation{0.5, M_PI / 2}};
    const Eigen::VectorXd r = step(rot, Eigen::Vector2d(1.0, 0.0));
    CHECK(std::abs(r[0]) <= 1e-16);
    CHECK(r[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("van der pol and duffing match an independent RK4") {
    const ReferenceSystem vdp{system::VanDerPol{1.0, 0.01}};
    const Eigen::VectorXd x1 = step(vdp, Eigen::Vector2d(1.0, 0.0));
    auto f = [](std::array<double, 2> x) {
        return std::array<double, 2>{x[1], 1.0 * (1 - x[0] * x[0]) * x[1] - x[0]};
    };
    const auto ref = rk4(f, {1.0, 0.0}, 0.01);
    CHECK(x1[0] == doctest::Approx(ref[0]).epsilon(1e-15));
    CHECK(x1[1] == doctest::Approx(ref[1]).epsilon(1e-15));
    // frozen from the first verified run
    CHECK(x1[0] == doctest::Approx(0.9999500004125).epsilon(1e-13));
    CHECK(x1[1] == doctest::Approx(-0.009999835833240002).epsilon(1e-13));

    Eigen::VectorXd x = Eigen::Vector2d(1.0, 0.0);
    std::array<double, 2> y{1.0, 0.0};
    for (int k = 0; k < 500; ++k) {
        x = step(vdp, x);
        y = rk4(f, y, 0.01);
    }
    CHECK(x[0] == doctest::Approx(y[0]).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(y[1]).epsilon(1e-12));

    const ReferenceSystem duff{system::Duffing{-1.0, 1.0, 0.5, 0.05}};
    auto g = [](std::array<double, 2> s) {
        return std::array<double, 2>{s[1], -0.5 * s[1] + s[0] - s[0] * s[0] * s[0]};
    };
    const auto dref = rk4(g, {0.5, -0.2}, 0.05);
    const Eigen::VectorXd d1 = step(duff, Eigen::Vector2d(0.5, -0.2));
    CHECK(d1[0] == doctest::Approx(dref[0]).epsilon(1e-15));
    CHECK(d1[1] == doctest::Approx(dref[1]).epsilon(1e-15));
}

TEST_CASE("observation maps") {
    const Eigen::Vector2d x(2.0, -3.0);
    CHECK(observe({system::Rotation{}, output::FullState{}}, x) == x);
    const Eigen::MatrixXd C{{1.0, 1.0}};
    CHECK(observe({system::Rotation{}, output::LinearMap{C}}, x)[0] == -1.0);
    const ReferenceSystem powers{system::Rotation{}, output::ComponentPowers{{{0, 2}, {1, 3}}}};
    CHECK(observe(powers, x) == Eigen::Vector2d(4.0, -27.0));
    CHECK(output_dim(powers) == 2);
    const ReferenceSystem custom{system::Rotation{},
                                 output::Custom{[](const Eigen::VectorXd& s) { return Eigen::VectorXd::Constant(1, s.sum()); }, 1}};
    CHECK(observe(custom, x)[0] == -1.0);
}

TEST_CASE("invalid systems") {
    CHECK_THROWS_AS(validate({system::Linear{Eigen::MatrixXd::Zero(2, 3)}}), ConfigurationError);
    CHECK_THROWS_AS(validate({system::VanDerPol{1.0, 0.0}}), ConfigurationError);
    CHECK_THROWS_AS(validate({system::ScalarPoly{{}}}), ConfigurationError);
    CHECK_THROWS_AS(validate({system::Rotation{}, output::ComponentPowers{{{2, 1}}}}), ConfigurationError);
    CHECK_THROWS_AS(step({system::ScalarPoly{{0.0, 0.0, 1.0}}}, Eigen::VectorXd::Constant(1, 1e200)), DivergenceError);
}

TEST_CASE("snapshot generation") {
    const Eigen::Matrix2d A{{0.9, 0.1}, {0.0, 0.8}};
    const ReferenceSystem lin{system::Linear{A}};

    SUBCASE("one trajectory, one step") {
        const auto r = generate_snapshots(lin, std::vector<Eigen::VectorXd>{Eigen::Vector2d(1, 1)}, 1);
        CHECK(r.snapshots.samples() == 1);
    }
    SUBCASE("three trajectories of five steps") {
        const RandomInitialStates box{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), 3};
        const SimulationResult r = generate_snapshots(lin, box, 5, 42);
        const SnapshotSet& s = r.snapshots;
        REQUIRE(s.samples() == 15);
        CHECK(s.Xplus() == s.X() * A.transpose());
        CHECK(*s.Y() == s.X());
        CHECK(*s.Yplus() == s.Xplus());
        for (Eigen::Index t = 0; t < 3; ++t)
            for (Eigen::Index k = 0; k + 1 < 5; ++k) CHECK(s.X().row(5 * t + k + 1) == s.Xplus().row(5 * t + k));
        for (Eigen::Index t = 0; t < 3; ++t) {
            CHECK(s.X().row(5 * t).cwiseAbs().maxCoeff() <= 1.0);
        }
        const SimulationResult again = generate_snapshots(lin, box, 5, 42);
        CHECK(again.snapshots.X() == s.X());
        CHECK(generate_snapshots(lin, box, 5, 43).snapshots.X() != s.X());
    }
    SUBCASE("diverging trajectory is truncated with a warning") {
        const ReferenceSystem blowup{system::ScalarPoly{{0.0, 0.0, 1.0}}};
        const std::vector<Eigen::VectorXd> x0{Eigen::VectorXd::Constant(1, 10.0), Eigen::VectorXd::Constant(1, 0.5)};
        const SimulationResult r = generate_snapshots(blowup, x0, 20);
        CHECK_FALSE(r.warnings.empty());
        CHECK(r.snapshots.samples() < 40);
        CHECK(r.snapshots.samples() >= 20);
        CHECK(r.snapshots.X().allFinite());
        CHECK(r.snapshots.Xplus().allFinite());
    }
}
