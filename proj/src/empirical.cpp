#include "koopman/empirical.hpp"

#include <cmath>
#include <string>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* name) {
    if (!M.allFinite()) throw DataValidationError(std::string(name) + " contains non-finite values");
}

std::string shape(const Eigen::MatrixXd& M) {
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

}  // namespace

SnapshotSet::SnapshotSet(Eigen::MatrixXd X, Eigen::MatrixXd Xplus, std::optional<Eigen::MatrixXd> Y,
                         std::optional<Eigen::MatrixXd> Yplus)
    : X_(std::move(X)), Xplus_(std::move(Xplus)), Y_(std::move(Y)), Yplus_(std::move(Yplus)) {
    if (X_.rows() < 1 || X_.cols() < 1) throw InputShapeError("snapshot set needs at least one sample");
    if (X_.rows() != Xplus_.rows() || X_.cols() != Xplus_.cols())
        throw InputShapeError("X is " + shape(X_) + " but X+ is " + shape(Xplus_));
    if (Y_ && Y_->rows() != X_.rows())
        throw InputShapeError("Y has " + std::to_string(Y_->rows()) + " rows, expected " +
                              std::to_string(X_.rows()));
    if (Yplus_) {
        if (!Y_) throw InputShapeError("Y+ given without Y");
        if (Yplus_->rows() != Y_->rows() || Yplus_->cols() != Y_->cols())
            throw InputShapeError("Y is " + shape(*Y_) + " but Y+ is " + shape(*Yplus_));
    }
    require_finite(X_, "X");
    require_finite(Xplus_, "X+");
    if (Y_) require_finite(*Y_, "Y");
    if (Yplus_) require_finite(*Yplus_, "Y+");
}

SnapshotSet SnapshotSet::with_outputs(Eigen::MatrixXd Y, std::optional<Eigen::MatrixXd> Yplus) const {
    return SnapshotSet(X_, Xplus_, std::move(Y), std::move(Yplus));
}

Eigen::MatrixXd empirical_inner_products(const Eigen::Ref<const Eigen::MatrixXd>& Left,
                                         const Eigen::Ref<const Eigen::MatrixXd>& Right) {
    if (Left.rows() != Right.rows())
        throw InputShapeError("inner products need equal sample counts");
    if (Left.rows() == 0) throw InputShapeError("inner products need at least one sample");
    // Samples are accumulated in index order for every entry, so identical
    // columns produce bit-identical rows of the result.
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Left.cols(), Right.cols());
    for (Eigen::Index k = 0; k < Left.rows(); ++k)
        for (Eigen::Index j = 0; j < Right.cols(); ++j) {
            const double r = Right(k, j);
            for (Eigen::Index i = 0; i < Left.cols(); ++i) out(i, j) += Left(k, i) * r;
        }
    return out / static_cast<double>(Left.rows());
}

EmpiricalGram build_gram(const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                         const Eigen::Ref<const Eigen::MatrixXd>& PsiPlus,
                         const std::optional<Eigen::MatrixXd>& Y) {
    if (Psi.rows() != PsiPlus.rows() || Psi.cols() != PsiPlus.cols())
        throw InputShapeError("Psi(X) and Psi(X+) shapes differ");
    if (Y && Y->rows() != Psi.rows()) throw InputShapeError("Y row count differs from sample count");
    if (!Psi.allFinite() || !PsiPlus.allFinite())
        throw DataValidationError("dictionary evaluation produced non-finite values");
    if (Y && !Y->allFinite()) throw DataValidationError("Y contains non-finite values");

    EmpiricalGram gram;
    gram.m = static_cast<std::size_t>(Psi.rows());
    gram.G = empirical_inner_products(Psi, Psi);
    // Mirror the upper triangle so G is exactly symmetric.
    gram.G.triangularView<Eigen::StrictlyLower>() = gram.G.transpose();
    gram.A = empirical_inner_products(Psi, PsiPlus);
    if (Y) gram.B = empirical_inner_products(Psi, *Y);
    return gram;
}

EmpiricalGram build_gram(const Dictionary& dict, const SnapshotSet& data) {
    if (dict.state_dim() != data.state_dim())
        throw InputShapeError("dictionary state dimension " + std::to_string(dict.state_dim()) +
                              " does not match data dimension " + std::to_string(data.state_dim()));
    return build_gram(dict.evaluate_matrix(data.X()), dict.evaluate_matrix(data.Xplus()), data.Y());
}

double empirical_norm(const Eigen::Ref<const Eigen::VectorXd>& samples) {
    if (samples.size() == 0) throw InputShapeError("empirical norm of zero samples");
    return samples.norm() / std::sqrt(static_cast<double>(samples.size()));
}

double empirical_norm(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& w) {
    if (static_cast<std::size_t>(w.size()) != dict.size())
        throw InputShapeError("weight vector length does not match dictionary size");
    const Eigen::VectorXd values = dict.evaluate_matrix(X) * w;
    return empirical_norm(values);
}

double empirical_norm(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXcd>& w) {
    if (static_cast<std::size_t>(w.size()) != dict.size())
        throw InputShapeError("weight vector length does not match dictionary size");
    if (X.rows() == 0) throw InputShapeError("empirical norm of zero samples");
    const Eigen::VectorXcd values = dict.evaluate_matrix(X).cast<std::complex<double>>() * w;
    return values.norm() / std::sqrt(static_cast<double>(X.rows()));
}

}  // namespace koopman
