#include "koopman/solver.hpp"

#include <cmath>
#include <limits>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& rhs, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success || !(llt.rcond() >= std::numeric_limits<double>::epsilon()))
        throw SingularSystemError(std::string(what) +
                                  " is singular to working precision; use pseudoinverse mode or raise the "
                                  "regularization weight");
    return llt.solve(rhs);
}

void check_gram(const EmpiricalGram& gram) {
    if (gram.G.rows() == 0 || gram.G.rows() != gram.G.cols())
        throw InputShapeError("Gram matrix must be square and non-empty");
    if (gram.A.rows() != gram.G.rows() || gram.A.cols() != gram.G.cols())
        throw InputShapeError("A must have the shape of G");
    if (gram.B && gram.B->rows() != gram.G.rows()) throw InputShapeError("B must have n_L rows");
}

const Eigen::MatrixXd& require_B(const EmpiricalGram& gram) {
    if (!gram.B) throw MissingOutputError("output weights need output data (B is absent)");
    return *gram.B;
}

Eigen::MatrixXd prior_or_zero(const regularizer::Tikhonov& t, Eigen::Index rows, Eigen::Index cols) {
    if (t.W0.size() == 0) return Eigen::MatrixXd::Zero(rows, cols);
    if (t.W0.rows() != rows || t.W0.cols() != cols)
        throw ConfigurationError("tikhonov W0 is " + std::to_string(t.W0.rows()) + "x" +
                                 std::to_string(t.W0.cols()) + ", expected " + std::to_string(rows) + "x" +
                                 std::to_string(cols));
    return t.W0;
}

Eigen::MatrixXd solve_mode(const EmpiricalGram& gram, const RegularizerSpec& reg, const Eigen::MatrixXd& rhs) {
    const Eigen::Index n = gram.G.rows();
    return std::visit(
        Overloaded{
            [&](const regularizer::Pseudoinverse& p) -> Eigen::MatrixXd {
                return truncated_pseudoinverse(gram.G, p.svd_rtol) * rhs;
            },
            [&](const regularizer::Ridge& r) -> Eigen::MatrixXd {
                Eigen::MatrixXd M = gram.G;
                M.diagonal().array() += r.beta;
                return spd_solve(M, rhs, "G + beta I");
            },
            [&](const regularizer::Tikhonov& t) -> Eigen::MatrixXd {
                const Eigen::MatrixXd Q = penalty_matrix(t, n);
                const Eigen::MatrixXd W0 = prior_or_zero(t, n, rhs.cols());
                return spd_solve(gram.G + Q, rhs + Q * W0, "G + Q");
            },
        },
        reg);
}

}  // namespace

std::string mode_name(const RegularizerSpec& reg) {
    return std::visit(Overloaded{
                          [](const regularizer::Pseudoinverse&) { return std::string("pseudoinverse"); },
                          [](const regularizer::Ridge&) { return std::string("ridge"); },
                          [](const regularizer::Tikhonov&) { return std::string("tikhonov"); },
                      },
                      reg);
}

Eigen::MatrixXd penalty_matrix(const regularizer::Tikhonov& t, Eigen::Index n_L) {
    return std::visit(Overloaded{
                          [&](const regularizer::ScaledIdentity& s) -> Eigen::MatrixXd {
                              return s.beta * Eigen::MatrixXd::Identity(n_L, n_L);
                          },
                          [&](const Eigen::MatrixXd& Q) -> Eigen::MatrixXd {
                              if (Q.rows() != n_L || Q.cols() != n_L)
                                  throw ConfigurationError("tikhonov Q must be " + std::to_string(n_L) + "x" +
                                                           std::to_string(n_L));
                              return Q;
                          },
                      },
                      t.Q);
}

void validate(const RegularizerSpec& reg, Eigen::Index n_L) {
    std::visit(
        Overloaded{
            [](const regularizer::Pseudoinverse& p) {
                if (!(p.svd_rtol > 0.0 && p.svd_rtol < 1.0))
                    throw ConfigurationError("svd_rtol must lie in (0, 1)");
            },
            [](const regularizer::Ridge& r) {
                if (!(r.beta >= 0.0) || !std::isfinite(r.beta))
                    throw ConfigurationError("ridge beta must be finite and non-negative");
            },
            [&](const regularizer::Tikhonov& t) {
                if (const auto* s = std::get_if<regularizer::ScaledIdentity>(&t.Q)) {
                    if (!(s->beta >= 0.0) || !std::isfinite(s->beta))
                        throw ConfigurationError("tikhonov scalar Q must be finite and non-negative");
                } else {
                    const auto& Q = std::get<Eigen::MatrixXd>(t.Q);
                    if (Q.rows() != Q.cols() || Q.rows() == 0) throw ConfigurationError("tikhonov Q must be square");
                    if (n_L > 0 && Q.rows() != n_L)
                        throw ConfigurationError("tikhonov Q must be " + std::to_string(n_L) + "x" +
                                                 std::to_string(n_L));
                    if (!Q.allFinite()) throw ConfigurationError("tikhonov Q is not finite");
                    const double scale = Q.norm();
                    if ((Q - Q.transpose()).norm() > 1e-12 * scale)
                        throw ConfigurationError("tikhonov Q must be symmetric");
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
                    const double two_norm = es.eigenvalues().cwiseAbs().maxCoeff();
                    if (es.eigenvalues().minCoeff() < -1e-10 * two_norm)
                        throw ConfigurationError("tikhonov Q must be positive semidefinite");
                }
                if (!t.W0.allFinite()) throw ConfigurationError("tikhonov W0 is not finite");
                if (n_L > 0 && t.W0.size() > 0 && t.W0.rows() != n_L)
                    throw ConfigurationError("tikhonov W0 must have " + std::to_string(n_L) + " rows");
                if (!t.prior_columns.empty()) {
                    std::vector<bool> is_prior(static_cast<std::size_t>(t.W0.cols()), false);
                    for (std::size_t c : t.prior_columns) {
                        if (c >= is_prior.size())
                            throw ConfigurationError("prior column " + std::to_string(c) + " out of range");
                        is_prior[c] = true;
                    }
                    for (Eigen::Index c = 0; c < t.W0.cols(); ++c)
                        if (!is_prior[static_cast<std::size_t>(c)] && !t.W0.col(c).isZero(0.0))
                            throw ConfigurationError("W0 column " + std::to_string(c) +
                                                     " is not a prior column and must be zero");
                }
            },
        },
        reg);
}

Eigen::MatrixXd truncated_pseudoinverse(const Eigen::Ref<const Eigen::MatrixXd>& M, double rtol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    if (s.size() > 0 && s[0] > 0.0) {
        const double cutoff = rtol * s[0];
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s[i] >= cutoff) inv[i] = 1.0 / s[i];
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double condition_number(const Eigen::Ref<const Eigen::MatrixXd>& M) {
    if (M.size() == 0) return 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const Eigen::VectorXd& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

double system_condition(const EmpiricalGram& gram, const RegularizerSpec& reg) {
    check_gram(gram);
    const Eigen::Index n = gram.G.rows();
    return std::visit(Overloaded{
                          [&](const regularizer::Pseudoinverse&) { return condition_number(gram.G); },
                          [&](const regularizer::Ridge& r) {
                              Eigen::MatrixXd M = gram.G;
                              M.diagonal().array() += r.beta;
                              return condition_number(M);
                          },
                          [&](const regularizer::Tikhonov& t) {
                              return condition_number(gram.G + penalty_matrix(t, n));
                          },
                      },
                      reg);
}

Eigen::MatrixXd koopman_matrix(const EmpiricalGram& gram, const RegularizerSpec& reg) {
    check_gram(gram);
    validate(reg, gram.G.rows());
    return solve_mode(gram, reg, gram.A);
}

Eigen::MatrixXd output_weights(const EmpiricalGram& gram, const RegularizerSpec& reg) {
    check_gram(gram);
    validate(reg, gram.G.rows());
    return solve_mode(gram, reg, require_B(gram));
}

namespace {

Eigen::MatrixXd sample_solve(const Eigen::Ref<const Eigen::MatrixXd>& Psi, const Eigen::Ref<const Eigen::MatrixXd>& Rhs,
                             const RegularizerSpec& reg, bool operator_rhs) {
    if (Psi.rows() == 0 || Psi.cols() == 0) throw InputShapeError("sample matrix must be non-empty");
    if (Rhs.rows() != Psi.rows()) throw InputShapeError("right-hand side must have one row per sample");
    validate(reg, Psi.cols());
    const auto* p = std::get_if<regularizer::Pseudoinverse>(&reg);
    if (!p) {
        const EmpiricalGram gram = build_gram(Psi, operator_rhs ? Rhs : Psi,
                                              operator_rhs ? std::nullopt : std::optional<Eigen::MatrixXd>(Rhs));
        return operator_rhs ? koopman_matrix(gram, reg) : output_weights(gram, reg);
    }
    // G^+ (Psi^T Rhs / m) = (Psi / sqrt(m))^+ (Rhs / sqrt(m)) = Psi^+ Rhs
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    if (s[0] > 0.0) {
        const double cutoff = std::sqrt(p->svd_rtol) * s[0];
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s[i] >= cutoff) inv[i] = 1.0 / s[i];
    }
    return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * Rhs));
}

}  // namespace

Eigen::MatrixXd koopman_matrix(const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                               const Eigen::Ref<const Eigen::MatrixXd>& PsiPlus, const RegularizerSpec& reg) {
    if (PsiPlus.cols() != Psi.cols()) throw InputShapeError("Psi(X+) must have n_L columns");
    return sample_solve(Psi, PsiPlus, reg, true);
}

Eigen::MatrixXd output_weights(const Eigen::Ref<const Eigen::MatrixXd>& Psi, const Eigen::Ref<const Eigen::MatrixXd>& Y,
                               const RegularizerSpec& reg) {
    return sample_solve(Psi, Y, reg, false);
}

Eigen::MatrixXd blockwise_tikhonov(const EmpiricalGram& gram, double beta1, double beta2,
                                   const Eigen::Ref<const Eigen::MatrixXd>& W0_known, std::size_t split) {
    check_gram(gram);
    const Eigen::MatrixXd& B = require_B(gram);
    const auto p = static_cast<std::size_t>(B.cols());
    if (split < 1 || split > p)
        throw ConfigurationError("block split " + std::to_string(split) + " must lie in [1, " +
                                 std::to_string(p) + "]");
    if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw ConfigurationError("block weights must be positive");
    const Eigen::Index n = gram.G.rows();
    const auto l = static_cast<Eigen::Index>(split);
    if (W0_known.rows() != n || W0_known.cols() != l)
        throw ConfigurationError("known prior must be " + std::to_string(n) + "x" + std::to_string(l));

    Eigen::MatrixXd W(n, B.cols());
    Eigen::MatrixXd M1 = gram.G;
    M1.diagonal().array() += beta1;
    W.leftCols(l) = spd_solve(M1, B.leftCols(l) + beta1 * W0_known, "G + beta1 I");
    if (l < B.cols()) {
        Eigen::MatrixXd M2 = gram.G;
        M2.diagonal().array() += beta2;
        W.rightCols(B.cols() - l) = spd_solve(M2, B.rightCols(B.cols() - l), "G + beta2 I");
    }
    return W;
}

double regularized_objective(const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y,
                             const Eigen::Ref<const Eigen::MatrixXd>& W,
                             const Eigen::Ref<const Eigen::MatrixXd>& Q,
                             const Eigen::Ref<const Eigen::MatrixXd>& W0) {
    const double fit = (Y - Psi * W).squaredNorm() / static_cast<double>(Psi.rows());
    const Eigen::MatrixXd D = W - W0;
    return fit + (D.transpose() * Q * D).trace();
}

}  // namespace koopman
