#include "koopman/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "koopman/errors.hpp"
#include "koopman/solver.hpp"

namespace koopman {

namespace {

double relative_floor(std::size_t m, std::size_t n_L) {
    return 1e-15 * static_cast<double>(m) * static_cast<double>(n_L);
}

const Eigen::MatrixXd& require_Y(const SnapshotSet& data) {
    if (!data.Y()) throw MissingOutputError("diagnostic needs output data Y");
    return *data.Y();
}

void check_weights(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& W, Eigen::Index p,
                   const char* name) {
    if (static_cast<std::size_t>(W.rows()) != dict.size() || W.cols() != p)
        throw InputShapeError(std::string(name) + " must be " + std::to_string(dict.size()) + "x" +
                              std::to_string(p));
}

void check_operator(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& K) {
    if (dict.state_dim() != data.state_dim()) throw InputShapeError("data does not match the dictionary state dimension");
    const auto n = static_cast<Eigen::Index>(dict.size());
    if (K.rows() != n || K.cols() != n) throw InputShapeError("K must be n_L x n_L");
}

}  // namespace

Eigen::VectorXd projection_check(const EmpiricalGram& gram, const SnapshotSet& data,
                                 const Eigen::Ref<const Eigen::MatrixXd>& W) {
    const Eigen::MatrixXd& Y = require_Y(data);
    if (W.rows() != gram.G.rows() || W.cols() != Y.cols())
        throw InputShapeError("weights do not match the Gram matrix and output count");
    Eigen::VectorXd margin(Y.cols());
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        const double g_norm = empirical_norm(Eigen::VectorXd(Y.col(i)));
        const double proj_sq = W.col(i).dot(gram.G * W.col(i));
        margin[i] = g_norm - std::sqrt(std::max(proj_sq, 0.0));
    }
    return margin;
}

double invariance_defect(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& K) {
    check_operator(dict, data, K);
    const Eigen::MatrixXd Psi = dict.evaluate_matrix(data.X());
    const Eigen::MatrixXd PsiPlus = dict.evaluate_matrix(data.Xplus());
    const double denom = std::max(PsiPlus.norm(), relative_floor(data.samples(), dict.size()));
    return (PsiPlus - Psi * K).norm() / denom;
}

Eigen::VectorXd span_defect(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& W) {
    const Eigen::MatrixXd& Y = require_Y(data);
    check_weights(dict, W, Y.cols(), "W");
    const Eigen::MatrixXd R = Y - dict.evaluate_matrix(data.X()) * W;
    const double floor = relative_floor(data.samples(), dict.size());
    Eigen::VectorXd out(Y.cols());
    for (Eigen::Index i = 0; i < Y.cols(); ++i) out[i] = R.col(i).norm() / std::max(Y.col(i).norm(), floor);
    return out;
}

ClaimGaps claim_gaps(const Dictionary& dict, const SnapshotSet& data, const Eigen::Ref<const Eigen::MatrixXd>& K,
                     const Eigen::Ref<const Eigen::MatrixXd>& W_span, const Eigen::Ref<const Eigen::MatrixXd>& W_proj,
                     double svd_rtol) {
    check_operator(dict, data, K);
    const Eigen::MatrixXd& Y = require_Y(data);
    check_weights(dict, W_span, Y.cols(), "W_span");
    check_weights(dict, W_proj, Y.cols(), "W_proj");

    const Eigen::MatrixXd Psi = dict.evaluate_matrix(data.X());
    const Eigen::MatrixXd propagated =
        data.Yplus() ? *data.Yplus() : Eigen::MatrixXd(dict.evaluate_matrix(data.Xplus()) * W_span);
    const Eigen::MatrixXd projected = Psi * (K * W_span);

    ClaimGaps gaps;
    gaps.claim1.resize(Y.cols());
    for (Eigen::Index i = 0; i < Y.cols(); ++i)
        gaps.claim1[i] = empirical_norm(Eigen::VectorXd(propagated.col(i))) -
                         empirical_norm(Eigen::VectorXd(projected.col(i)));

    if (data.Yplus()) {
        const Eigen::MatrixXd W_plus = output_weights(Psi, *data.Yplus(), regularizer::Pseudoinverse{svd_rtol});
        const Eigen::MatrixXd residual = Psi * (W_plus - K * W_proj);
        Eigen::VectorXd claim2(Y.cols());
        for (Eigen::Index i = 0; i < Y.cols(); ++i) claim2[i] = empirical_norm(Eigen::VectorXd(residual.col(i)));
        gaps.claim2 = std::move(claim2);
    }
    return gaps;
}

DiagnosticsReport full_report(const Dictionary& dict, const SnapshotSet& data, const KoopmanModel& model) {
    if (!(model.dictionary() == dict)) throw InputShapeError("model was fit with a different dictionary");
    if (dict.state_dim() != data.state_dim())
        throw InputShapeError("data has " + std::to_string(data.state_dim()) + " state columns, model expects " +
                              std::to_string(dict.state_dim()));

    DiagnosticsReport report;
    const EmpiricalGram gram = build_gram(dict, data);
    report.gram_condition = condition_number(gram.G);
    report.eig_condition = model.meta().eig_condition;
    report.invariance_defect = invariance_defect(dict, data, model.K());

    if (data.Y()) {
        if (data.Y()->cols() != model.W().cols())
            throw InputShapeError("data has " + std::to_string(data.Y()->cols()) + " outputs, model expects " +
                                  std::to_string(model.W().cols()));
        report.span_defect = span_defect(dict, data, model.W());
        report.projection_margin = projection_check(gram, data, model.W());
        ClaimGaps gaps = claim_gaps(dict, data, model.K(), model.W(), model.W());
        report.claim1_gap = std::move(gaps.claim1);
        report.claim2_gap = std::move(gaps.claim2);
    }

    if (!(report.gram_condition <= kIllConditioned))
        report.warnings.push_back("Gram matrix is ill-conditioned (condition > 1e12)");
    if (!(report.eig_condition <= kNearDefective))
        report.warnings.push_back("eigenvector matrix is near-defective (condition > 1e12)");
    for (const auto& w : model.meta().warnings) report.warnings.push_back(w);
    return report;
}

std::string render_text(const DiagnosticsReport& report) {
    std::ostringstream out;
    out << std::setprecision(6) << std::scientific;
    out << std::left << std::setw(20) << "invariance_defect" << report.invariance_defect << "\n";
    out << std::left << std::setw(20) << "gram_condition" << report.gram_condition << "\n";
    out << std::left << std::setw(20) << "eig_condition" << report.eig_condition << "\n\n";

    const Eigen::Index p = report.span_defect ? report.span_defect->size() : 0;
    out << std::left << std::setw(8) << "output" << std::right << std::setw(16) << "span_defect" << std::setw(16)
        << "projection_margin" << std::setw(16) << "claim1_gap" << std::setw(16) << "claim2_gap" << "\n";
    if (p == 0) out << "(no outputs: span, projection and claim fields unavailable)\n";
    auto cell = [&](const std::optional<Eigen::VectorXd>& v, Eigen::Index i) {
        if (v) {
            out << std::setw(16) << (*v)[i];
        } else {
            out << std::setw(16) << "unavailable";
        }
    };
    for (Eigen::Index i = 0; i < p; ++i) {
        out << std::left << std::setw(8) << ("y" + std::to_string(i + 1)) << std::right;
        cell(report.span_defect, i);
        cell(report.projection_margin, i);
        cell(report.claim1_gap, i);
        cell(report.claim2_gap, i);
        out << "\n";
    }
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    return out.str();
}

}  // namespace koopman
