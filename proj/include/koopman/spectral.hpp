#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/dictionary.hpp"
#include "koopman/solver.hpp"

namespace koopman {

// Fit provenance carried alongside a model.
struct ModelMeta {
    std::optional<RegularizerSpec> regularizer;
    std::optional<RegularizerSpec> operator_regularizer;
    std::size_t samples = 0;
    double gram_condition = 0.0;
    double system_condition = 0.0;
    double eig_condition = 0.0;
    std::vector<std::string> warnings;
};

// Finite-section Koopman model: K (n_L x n_L), its eigenpairs, output weights W
// (n_L x p) and Koopman modes C = (V^-1 W)^T (p x n_L). Immutable once built.
class KoopmanModel {
public:
    // Assembles a model from stored parts (deserialization). Checks shapes only.
    KoopmanModel(Dictionary dict, Eigen::MatrixXd K, Eigen::VectorXcd eigenvalues, Eigen::MatrixXcd V,
                 Eigen::MatrixXd W, Eigen::MatrixXcd modes, ModelMeta meta);

    const Dictionary& dictionary() const noexcept { return dict_; }
    const Eigen::MatrixXd& K() const noexcept { return K_; }
    const Eigen::VectorXcd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXcd& V() const noexcept { return V_; }
    const Eigen::MatrixXd& W() const noexcept { return W_; }
    // Empty when the model was fit without modes.
    const Eigen::MatrixXcd& modes() const noexcept { return modes_; }
    const ModelMeta& meta() const noexcept { return meta_; }

    bool has_modes() const noexcept { return modes_.size() > 0; }
    std::size_t basis_size() const noexcept { return static_cast<std::size_t>(K_.rows()); }
    std::size_t output_dim() const noexcept { return static_cast<std::size_t>(W_.cols()); }

private:
    Dictionary dict_;
    Eigen::MatrixXd K_;
    Eigen::VectorXcd eigenvalues_;
    Eigen::MatrixXcd V_;
    Eigen::MatrixXd W_;
    Eigen::MatrixXcd modes_;
    ModelMeta meta_;
};

inline constexpr double kNearDefective = 1e12;

// Eigendecomposition of K with eigenvalues ordered by descending modulus (ties:
// descending real part, then ascending imaginary part), unit-norm eigenvectors whose
// first nonzero entry is real and positive, conjugate pairs stored adjacently with
// conjugate eigenvectors and modes. compute_modes = false leaves modes empty.
KoopmanModel decompose(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& K,
                       const Eigen::Ref<const Eigen::MatrixXd>& W, ModelMeta meta = {},
                       bool compute_modes = true);

// Psi(X) V; column i holds phi_i = psi^T v_i at every sample.
Eigen::MatrixXcd eigenfunction_values(const KoopmanModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

struct Prediction {
    Eigen::VectorXd values;
    // Largest |imaginary part| discarded when taking the real part.
    double max_imag = 0.0;
};

struct Trajectory {
    Eigen::MatrixXd values;  // row k = prediction after k steps
    double max_imag = 0.0;
};

// Re sum_j c_j lambda_j^k phi_j(x0).
Prediction predict(const KoopmanModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0, std::size_t k);

// Rows 0..k_max of predict, advancing eigenfunction coordinates by diag(Lambda) each step.
Trajectory predict_trajectory(const KoopmanModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0,
                              std::size_t k_max);

}  // namespace koopman
