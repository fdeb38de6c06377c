#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopman/dictionary.hpp"
#include "koopman/empirical.hpp"
#include "koopman/spectral.hpp"

namespace koopman {

// Numerical checks of the projection and invariance properties of a fitted model,
// all measured under the empirical measure of the supplied samples. Gaps and
// defects are signed so that a positive value means the defect is present.
struct DiagnosticsReport {
    // |g_i - psi^T w_i| / |g_i| per output.
    std::optional<Eigen::VectorXd> span_defect;
    // |Psi(X+) - Psi(X) K|_F / |Psi(X+)|_F
    double invariance_defect = 0.0;
    // |g_i o S| - |P(g_i o S)| for g_i = psi^T w_i taken as lying in the span.
    std::optional<Eigen::VectorXd> claim1_gap;
    // |psi^T w+_i - psi^T K w_i| with w+_i the projection of g_i o S; needs Y+.
    std::optional<Eigen::VectorXd> claim2_gap;
    // |g_i| - |psi^T w_i| per output.
    std::optional<Eigen::VectorXd> projection_margin;
    double gram_condition = 0.0;
    double eig_condition = 0.0;
    std::vector<std::string> warnings;
};

struct ClaimGaps {
    Eigen::VectorXd claim1;
    std::optional<Eigen::VectorXd> claim2;
};

// |g_i| - |psi^T w_i| for each output column, from G and the sampled outputs.
Eigen::VectorXd projection_check(const EmpiricalGram& gram, const SnapshotSet& data,
                                 const Eigen::Ref<const Eigen::MatrixXd>& W);

double invariance_defect(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& K);

Eigen::VectorXd span_defect(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& W);

// claim1 uses W_span as exact representations of the outputs; the propagated
// outputs come from Y+ when present, otherwise from Psi(X+) W_span. claim2 projects
// Y+ with a truncated pseudoinverse (svd_rtol) and is empty when Y+ is absent.
ClaimGaps claim_gaps(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& K,
                     const Eigen::Ref<const Eigen::MatrixXd>& W_span, const Eigen::Ref<const Eigen::MatrixXd>& W_proj,
                     double svd_rtol = 1e-12);

DiagnosticsReport full_report(const Dictionary& dict, const SnapshotSet& data, const KoopmanModel& model);

// Aligned plain-text table.
std::string render_text(const DiagnosticsReport& report);

}  // namespace koopman
