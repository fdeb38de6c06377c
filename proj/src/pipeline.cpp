#include "koopman/pipeline.hpp"

#include "koopman/errors.hpp"

namespace koopman {

RegularizerSpec default_operator_regularizer(const RegularizerSpec& output_regularizer) {
    if (const auto* t = std::get_if<regularizer::Tikhonov>(&output_regularizer)) {
        regularizer::Tikhonov op;
        op.Q = t->Q;
        return op;
    }
    return output_regularizer;
}

SnapshotSet with_default_outputs(const SnapshotSet& data) {
    if (data.Y()) return data;
    return data.with_outputs(data.X(), data.Xplus());
}

KoopmanModel fit(const Dictionary& dict, const SnapshotSet& data, const FitOptions& options) {
    const SnapshotSet fit_data = with_default_outputs(data);
    const RegularizerSpec op_reg = options.operator_regularizer.value_or(default_operator_regularizer(options.regularizer));

    const Eigen::MatrixXd Psi = dict.evaluate_matrix(fit_data.X());
    const Eigen::MatrixXd PsiPlus = dict.evaluate_matrix(fit_data.Xplus());
    const EmpiricalGram gram = build_gram(Psi, PsiPlus, fit_data.Y());
    ModelMeta meta;
    meta.regularizer = options.regularizer;
    meta.operator_regularizer = op_reg;
    meta.samples = gram.m;
    meta.gram_condition = condition_number(gram.G);
    meta.system_condition = system_condition(gram, options.regularizer);
    if (!(meta.system_condition <= kIllConditioned))
        meta.warnings.push_back("solve matrix is ill-conditioned (condition " + std::to_string(meta.system_condition) +
                                ")");

    const Eigen::MatrixXd K = koopman_matrix(Psi, PsiPlus, op_reg);
    const Eigen::MatrixXd W = output_weights(Psi, *fit_data.Y(), options.regularizer);
    return decompose(dict, K, W, std::move(meta), options.compute_modes);
}

}  // namespace koopman
