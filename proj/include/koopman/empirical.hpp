#pragma once

#include <complex>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "koopman/dictionary.hpp"

namespace koopman {

// Snapshot pairs (x_k, S(x_k)) stored one sample per row, with optional outputs
// Y (row k = g(x_k)) and successor outputs Yplus (row k = g(S(x_k))).
class SnapshotSet {
public:
    SnapshotSet(Eigen::MatrixXd X, Eigen::MatrixXd Xplus, std::optional<Eigen::MatrixXd> Y = std::nullopt,
                std::optional<Eigen::MatrixXd> Yplus = std::nullopt);

    const Eigen::MatrixXd& X() const noexcept { return X_; }
    const Eigen::MatrixXd& Xplus() const noexcept { return Xplus_; }
    const std::optional<Eigen::MatrixXd>& Y() const noexcept { return Y_; }
    const std::optional<Eigen::MatrixXd>& Yplus() const noexcept { return Yplus_; }

    std::size_t samples() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    std::size_t state_dim() const noexcept { return static_cast<std::size_t>(X_.cols()); }
    std::size_t output_dim() const noexcept { return Y_ ? static_cast<std::size_t>(Y_->cols()) : 0; }

    // Same snapshots with Y (and Yplus) replaced; used to fit full-state outputs.
    SnapshotSet with_outputs(Eigen::MatrixXd Y, std::optional<Eigen::MatrixXd> Yplus) const;

private:
    Eigen::MatrixXd X_;
    Eigen::MatrixXd Xplus_;
    std::optional<Eigen::MatrixXd> Y_;
    std::optional<Eigen::MatrixXd> Yplus_;
};

// Empirical inner products under the uniform measure on the m samples:
// G = Psi(X)^T Psi(X) / m, A = Psi(X)^T Psi(X+) / m, B = Psi(X)^T Y / m.
struct EmpiricalGram {
    Eigen::MatrixXd G;
    Eigen::MatrixXd A;
    std::optional<Eigen::MatrixXd> B;
    std::size_t m = 0;

    Eigen::Index basis_size() const noexcept { return G.rows(); }
};

EmpiricalGram build_gram(const Dictionary& dict, const SnapshotSet& data);

// Same as build_gram from precomputed dictionary evaluations.
EmpiricalGram build_gram(const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                         const Eigen::Ref<const Eigen::MatrixXd>& PsiPlus,
                         const std::optional<Eigen::MatrixXd>& Y);

// (1/m) Left^T Right with a fixed summation order over samples.
Eigen::MatrixXd empirical_inner_products(const Eigen::Ref<const Eigen::MatrixXd>& Left,
                                         const Eigen::Ref<const Eigen::MatrixXd>& Right);

// L2(mu_X) norm of the observable psi^T w: sqrt(w^* G w) = |Psi(X) w|_2 / sqrt(m).
double empirical_norm(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& w);
double empirical_norm(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXcd>& w);

// L2(mu_X) norm of sampled values: |v|_2 / sqrt(m).
double empirical_norm(const Eigen::Ref<const Eigen::VectorXd>& samples);

}  // namespace koopman
