#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace koopman {

namespace basis {

struct Constant {};

// psi(x) = x[index]
struct Coordinate {
    std::size_t index = 0;
};

// psi(x) = prod_j x[j]^exponents[j]
struct Monomial {
    std::vector<unsigned> exponents;
};

// psi(x) = exp(-|x - c|^2 / (2 bandwidth^2))
struct GaussianRbf {
    Eigen::VectorXd center;
    double bandwidth = 1.0;
};

// psi(x) = r^2 log r with r = |x - c|; defined as 0 at r = 0.
struct ThinPlateSpline {
    Eigen::VectorXd center;
};

// psi(x) = c . x, a guessed linear output row.
struct AffineOutput {
    Eigen::VectorXd row;
};

}  // namespace basis

using BasisFunction = std::variant<basis::Constant, basis::Coordinate, basis::Monomial,
                                   basis::GaussianRbf, basis::ThinPlateSpline, basis::AffineOutput>;

// Name used in serialized form ("constant", "gaussian-rbf", ...).
std::string kind_name(const BasisFunction& f);

double evaluate_basis(const BasisFunction& f, const Eigen::Ref<const Eigen::VectorXd>& x);

// Ordered, immutable set of real observables psi_1..psi_nL over R^n.
class Dictionary {
public:
    // Throws ConfigurationError if basis is empty or any element is inconsistent with state_dim.
    Dictionary(std::size_t state_dim, std::vector<BasisFunction> basis);

    std::size_t state_dim() const noexcept { return state_dim_; }
    std::size_t size() const noexcept { return basis_.size(); }
    const std::vector<BasisFunction>& basis() const noexcept { return basis_; }

    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    // Row k of the result is evaluate(X.row(k)).
    Eigen::MatrixXd evaluate_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

    friend bool operator==(const Dictionary& a, const Dictionary& b);

private:
    std::size_t state_dim_;
    std::vector<BasisFunction> basis_;
};

struct DictionarySpec {
    std::size_t state_dim = 0;
    std::optional<unsigned> monomial_degree;
    std::vector<Eigen::VectorXd> rbf_centers;
    double rbf_bandwidth = 1.0;
    bool include_state = false;
    std::vector<Eigen::VectorXd> output_guess_rows;
};

// Ordering: affine-output rows, state coordinates, constant, monomials (graded
// lexicographic, degree >= 1), then Gaussian RBFs in center order. When the state
// coordinates are already included the degree-1 monomials are skipped.
Dictionary make_standard_dictionary(const DictionarySpec& spec);

// Degree-ordered exponent tuples; within a degree, lexicographically descending
// (x1^2, x1 x2, x2^2). Includes the zero tuple.
std::vector<std::vector<unsigned>> graded_lex_exponents(std::size_t state_dim, unsigned max_degree);

// Draws count centers uniformly from the axis-aligned bounding box of the rows of X.
std::vector<Eigen::VectorXd> sample_rbf_centers(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                                std::size_t count, std::uint64_t seed);

}  // namespace koopman
