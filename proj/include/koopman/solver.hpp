#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "koopman/empirical.hpp"

namespace koopman {

namespace regularizer {

// G^+ by truncated SVD; singular values below svd_rtol * sigma_max are discarded.
struct Pseudoinverse {
    double svd_rtol = 1e-12;
};

// (G + beta I)^-1
struct Ridge {
    double beta = 0.0;
};

// Q = beta I, size fixed by the dictionary at solve time.
struct ScaledIdentity {
    double beta = 0.0;
};

// (G + Q)^-1 (B + Q W0). An empty W0 means a zero prior. prior_columns lists the
// (0-based) columns of W0 that carry a prior; every other column must be zero.
// An empty prior_columns with a non-empty W0 marks every column as a prior.
struct Tikhonov {
    std::variant<ScaledIdentity, Eigen::MatrixXd> Q = ScaledIdentity{};
    Eigen::MatrixXd W0;
    std::vector<std::size_t> prior_columns;
};

}  // namespace regularizer

using RegularizerSpec = std::variant<regularizer::Pseudoinverse, regularizer::Ridge, regularizer::Tikhonov>;

std::string mode_name(const RegularizerSpec& reg);

// Throws ConfigurationError when the regularizer is malformed. n_L is the
// dictionary size; pass 0 to skip the shape checks that need it.
void validate(const RegularizerSpec& reg, Eigen::Index n_L = 0);

Eigen::MatrixXd penalty_matrix(const regularizer::Tikhonov& t, Eigen::Index n_L);

// Moore-Penrose pseudoinverse by SVD, dropping sigma_i < rtol * sigma_max.
Eigen::MatrixXd truncated_pseudoinverse(const Eigen::Ref<const Eigen::MatrixXd>& M, double rtol);

// 2-norm condition number sigma_max / sigma_min (infinity when singular).
double condition_number(const Eigen::Ref<const Eigen::MatrixXd>& M);

// Condition number of the matrix the given mode factors or inverts (G, G + beta I, G + Q).
double system_condition(const EmpiricalGram& gram, const RegularizerSpec& reg);

// Koopman matrix K such that psi^T K approximates psi o S. In tikhonov mode W0
// must be n_L x n_L (or empty).
Eigen::MatrixXd koopman_matrix(const EmpiricalGram& gram, const RegularizerSpec& reg);

// Output weights W (n_L x p) with g approximated by psi^T W. Requires gram.B.
Eigen::MatrixXd output_weights(const EmpiricalGram& gram, const RegularizerSpec& reg);

// Same estimates from the sample matrices Psi = Psi(X) (m x n_L) and Rhs (Psi(X+)
// or Y). Pseudoinverse mode factors Psi / sqrt(m) by SVD instead of forming G,
// with the equivalent cutoff sigma_i(Psi) < sqrt(svd_rtol) sigma_max(Psi); this
// avoids squaring the condition number. Other modes go through the Gram matrices.
Eigen::MatrixXd koopman_matrix(const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                               const Eigen::Ref<const Eigen::MatrixXd>& PsiPlus, const RegularizerSpec& reg);
Eigen::MatrixXd output_weights(const Eigen::Ref<const Eigen::MatrixXd>& Psi, const Eigen::Ref<const Eigen::MatrixXd>& Y,
                               const RegularizerSpec& reg);

// [W1 | W2] where the first `split` output columns use (G + beta1 I)^-1 (B1 + beta1 W0_known)
// and the remaining ones use (G + beta2 I)^-1 B2.
Eigen::MatrixXd blockwise_tikhonov(const EmpiricalGram& gram, double beta1, double beta2,
                                   const Eigen::Ref<const Eigen::MatrixXd>& W0_known, std::size_t split);

// Sum over columns of |y_i - Psi w_i|^2 / m + (w_i - w0_i)^T Q (w_i - w0_i).
double regularized_objective(const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y,
                             const Eigen::Ref<const Eigen::MatrixXd>& W,
                             const Eigen::Ref<const Eigen::MatrixXd>& Q,
                             const Eigen::Ref<const Eigen::MatrixXd>& W0);

inline constexpr double kIllConditioned = 1e12;

}  // namespace koopman
