#include "koopman/dictionary.hpp"

#include <cmath>
#include <random>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const BasisFunction& f, std::size_t n, std::size_t position) {
    auto fail = [&](const std::string& why) {
        throw ConfigurationError("basis[" + std::to_string(position) + "] (" + kind_name(f) +
                                 "): " + why);
    };
    auto check_vector = [&](const Eigen::VectorXd& v, const char* what) {
        if (static_cast<std::size_t>(v.size()) != n)
            fail(std::string(what) + " length " + std::to_string(v.size()) +
                 " does not match state dimension " + std::to_string(n));
        if (!v.allFinite()) fail(std::string(what) + " is not finite");
    };
    std::visit(Overloaded{
                   [](const basis::Constant&) {},
                   [&](const basis::Coordinate& c) {
                       if (c.index >= n) fail("index out of range");
                   },
                   [&](const basis::Monomial& m) {
                       if (m.exponents.size() != n) fail("exponent count does not match state dimension");
                   },
                   [&](const basis::GaussianRbf& g) {
                       check_vector(g.center, "center");
                       if (!(g.bandwidth > 0.0) || !std::isfinite(g.bandwidth))
                           fail("bandwidth must be positive and finite");
                   },
                   [&](const basis::ThinPlateSpline& t) { check_vector(t.center, "center"); },
                   [&](const basis::AffineOutput& a) { check_vector(a.row, "row"); },
               },
               f);
}

bool same_basis(const BasisFunction& a, const BasisFunction& b) {
    if (a.index() != b.index()) return false;
    return std::visit(
        Overloaded{
            [](const basis::Constant&, const basis::Constant&) { return true; },
            [](const basis::Coordinate& x, const basis::Coordinate& y) { return x.index == y.index; },
            [](const basis::Monomial& x, const basis::Monomial& y) { return x.exponents == y.exponents; },
            [](const basis::GaussianRbf& x, const basis::GaussianRbf& y) {
                return x.bandwidth == y.bandwidth && x.center == y.center;
            },
            [](const basis::ThinPlateSpline& x, const basis::ThinPlateSpline& y) {
                return x.center == y.center;
            },
            [](const basis::AffineOutput& x, const basis::AffineOutput& y) { return x.row == y.row; },
            [](const auto&, const auto&) { return false; },
        },
        a, b);
}

}  // namespace

std::string kind_name(const BasisFunction& f) {
    return std::visit(Overloaded{
                          [](const basis::Constant&) { return std::string("constant"); },
                          [](const basis::Coordinate&) { return std::string("coordinate"); },
                          [](const basis::Monomial&) { return std::string("monomial"); },
                          [](const basis::GaussianRbf&) { return std::string("gaussian-rbf"); },
                          [](const basis::ThinPlateSpline&) { return std::string("thin-plate-spline"); },
                          [](const basis::AffineOutput&) { return std::string("affine-output"); },
                      },
                      f);
}

double evaluate_basis(const BasisFunction& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return std::visit(Overloaded{
                          [](const basis::Constant&) { return 1.0; },
                          [&](const basis::Coordinate& c) { return x[static_cast<Eigen::Index>(c.index)]; },
                          [&](const basis::Monomial& m) {
                              double value = 1.0;
                              for (std::size_t j = 0; j < m.exponents.size(); ++j) {
                                  const double xj = x[static_cast<Eigen::Index>(j)];
                                  for (unsigned e = 0; e < m.exponents[j]; ++e) value *= xj;
                              }
                              return value;
                          },
                          [&](const basis::GaussianRbf& g) {
                              const double r2 = (x - g.center).squaredNorm();
                              return std::exp(-r2 / (2.0 * g.bandwidth * g.bandwidth));
                          },
                          [&](const basis::ThinPlateSpline& t) {
                              const double r2 = (x - t.center).squaredNorm();
                              if (r2 == 0.0) return 0.0;
                              // r^2 log r = 0.5 r^2 log r^2
                              return 0.5 * r2 * std::log(r2);
                          },
                          [&](const basis::AffineOutput& a) { return a.row.dot(x); },
                      },
                      f);
}

Dictionary::Dictionary(std::size_t state_dim, std::vector<BasisFunction> basis)
    : state_dim_(state_dim), basis_(std::move(basis)) {
    if (state_dim_ == 0) throw ConfigurationError("dictionary state dimension must be positive");
    if (basis_.empty()) throw ConfigurationError("dictionary must contain at least one basis function");
    for (std::size_t i = 0; i < basis_.size(); ++i) validate(basis_[i], state_dim_, i);
}

Eigen::VectorXd Dictionary::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (static_cast<std::size_t>(x.size()) != state_dim_)
        throw InputShapeError("state has length " + std::to_string(x.size()) + ", dictionary expects " +
                              std::to_string(state_dim_));
    Eigen::VectorXd out(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = evaluate_basis(basis_[i], x);
    return out;
}

Eigen::MatrixXd Dictionary::evaluate_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    if (static_cast<std::size_t>(X.cols()) != state_dim_)
        throw InputShapeError("data has " + std::to_string(X.cols()) + " columns, dictionary expects " +
                              std::to_string(state_dim_));
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(basis_.size()));
    Eigen::VectorXd row(X.cols());
    for (Eigen::Index k = 0; k < X.rows(); ++k) {
        row = X.row(k).transpose();
        for (std::size_t i = 0; i < basis_.size(); ++i)
            out(k, static_cast<Eigen::Index>(i)) = evaluate_basis(basis_[i], row);
    }
    return out;
}

bool operator==(const Dictionary& a, const Dictionary& b) {
    if (a.state_dim_ != b.state_dim_ || a.basis_.size() != b.basis_.size()) return false;
    for (std::size_t i = 0; i < a.basis_.size(); ++i)
        if (!same_basis(a.basis_[i], b.basis_[i])) return false;
    return true;
}

std::vector<std::vector<unsigned>> graded_lex_exponents(std::size_t state_dim, unsigned max_degree) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> current(state_dim, 0);
    // Emits all tuples of total degree `remaining` over positions >= pos, first
    // position taking the largest power first.
    auto emit = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
        if (pos + 1 == state_dim) {
            current[pos] = remaining;
            out.push_back(current);
            return;
        }
        for (unsigned e = remaining + 1; e-- > 0;) {
            current[pos] = e;
            self(self, pos + 1, remaining - e);
        }
        current[pos] = 0;
    };
    for (unsigned d = 0; d <= max_degree; ++d) emit(emit, 0, d);
    return out;
}

Dictionary make_standard_dictionary(const DictionarySpec& spec) {
    if (spec.state_dim == 0) throw ConfigurationError("dictionary spec: state_dim must be positive");
    if (!spec.include_state && !spec.monomial_degree && spec.rbf_centers.empty() &&
        spec.output_guess_rows.empty())
        throw ConfigurationError("dictionary spec requests no basis family");

    std::vector<BasisFunction> basis;
    for (const auto& row : spec.output_guess_rows) basis.emplace_back(basis::AffineOutput{row});
    if (spec.include_state)
        for (std::size_t i = 0; i < spec.state_dim; ++i) basis.emplace_back(basis::Coordinate{i});
    if (spec.monomial_degree) {
        for (auto& exps : graded_lex_exponents(spec.state_dim, *spec.monomial_degree)) {
            unsigned degree = 0;
            for (unsigned e : exps) degree += e;
            if (degree == 0) {
                basis.emplace_back(basis::Constant{});
            } else if (degree == 1 && spec.include_state) {
                continue;
            } else {
                basis.emplace_back(basis::Monomial{std::move(exps)});
            }
        }
    }
    for (const auto& c : spec.rbf_centers) basis.emplace_back(basis::GaussianRbf{c, spec.rbf_bandwidth});
    return Dictionary(spec.state_dim, std::move(basis));
}

std::vector<Eigen::VectorXd> sample_rbf_centers(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                                std::size_t count, std::uint64_t seed) {
    if (X.rows() == 0 || X.cols() == 0) throw InputShapeError("cannot sample centers from empty data");
    const Eigen::VectorXd lo = X.colwise().minCoeff().transpose();
    const Eigen::VectorXd hi = X.colwise().maxCoeff().transpose();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        Eigen::VectorXd v(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) v[j] = lo[j] + (hi[j] - lo[j]) * unit(rng);
        centers.push_back(std::move(v));
    }
    return centers;
}

}  // namespace koopman
