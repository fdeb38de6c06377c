#include "koopman/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

using cplx = std::complex<double>;

// An eigenvalue, or a conjugate pair represented by its member with positive imaginary part.
struct SpectralUnit {
    cplx lambda;
    Eigen::VectorXcd v;
    bool pair = false;
};

void canonicalize(Eigen::VectorXcd& v) {
    const double norm = v.norm();
    if (norm == 0.0) return;
    v /= norm;
    const double biggest = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > 1e-10 * biggest) {
            v *= std::conj(v[i]) / a;
            v[i] = cplx(v[i].real(), 0.0);
            return;
        }
    }
}

double complex_condition(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const Eigen::VectorXd& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

}  // namespace

KoopmanModel::KoopmanModel(Dictionary dict, Eigen::MatrixXd K, Eigen::VectorXcd eigenvalues, Eigen::MatrixXcd V,
                           Eigen::MatrixXd W, Eigen::MatrixXcd modes, ModelMeta meta)
    : dict_(std::move(dict)),
      K_(std::move(K)),
      eigenvalues_(std::move(eigenvalues)),
      V_(std::move(V)),
      W_(std::move(W)),
      modes_(std::move(modes)),
      meta_(std::move(meta)) {
    const auto n = static_cast<Eigen::Index>(dict_.size());
    if (K_.rows() != n || K_.cols() != n)
        throw InputShapeError("K must be " + std::to_string(n) + "x" + std::to_string(n));
    if (eigenvalues_.size() != n) throw InputShapeError("eigenvalue count must equal the dictionary size");
    if (V_.rows() != n || V_.cols() != n) throw InputShapeError("V must be square with the dictionary size");
    if (W_.rows() != n) throw InputShapeError("W must have one row per basis function");
    if (modes_.size() > 0 && (modes_.rows() != W_.cols() || modes_.cols() != n))
        throw InputShapeError("modes must be p x n_L");
}

KoopmanModel decompose(const Dictionary& dict, const Eigen::Ref<const Eigen::MatrixXd>& K,
                       const Eigen::Ref<const Eigen::MatrixXd>& W, ModelMeta meta, bool compute_modes) {
    const Eigen::Index n = K.rows();
    if (n == 0 || K.cols() != n) throw InputShapeError("K must be square and non-empty");
    if (static_cast<std::size_t>(n) != dict.size())
        throw InputShapeError("K size does not match the dictionary size");
    if (W.rows() != n) throw InputShapeError("W must have n_L rows");
    if (!K.allFinite() || !W.allFinite()) throw DataValidationError("K or W contains non-finite values");

    Eigen::EigenSolver<Eigen::MatrixXd> es(K, true);
    if (es.info() != Eigen::Success) throw SingularSystemError("eigendecomposition of K did not converge");
    const Eigen::VectorXcd& lam = es.eigenvalues();
    const Eigen::MatrixXcd vecs = es.eigenvectors();

    std::vector<SpectralUnit> units;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lam[i].imag() == 0.0 || i + 1 == n) {
            SpectralUnit u{cplx(lam[i].real(), lam[i].imag()), vecs.col(i), false};
            canonicalize(u.v);
            units.push_back(std::move(u));
            continue;
        }
        // Real input: complex eigenvalues come in adjacent conjugate pairs.
        const Eigen::Index rep = lam[i].imag() > 0.0 ? i : i + 1;
        SpectralUnit u{lam[rep], vecs.col(rep), true};
        canonicalize(u.v);
        units.push_back(std::move(u));
        ++i;
    }

    std::stable_sort(units.begin(), units.end(), [](const SpectralUnit& a, const SpectralUnit& b) {
        const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
        if (ma != mb) return ma > mb;
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag());
    });

    Eigen::VectorXcd eigenvalues(n);
    Eigen::MatrixXcd V(n, n);
    std::vector<Eigen::Index> pair_starts;
    Eigen::Index col = 0;
    for (const auto& u : units) {
        if (u.pair) {
            pair_starts.push_back(col);
            eigenvalues[col] = std::conj(u.lambda);
            V.col(col) = u.v.conjugate();
            eigenvalues[col + 1] = u.lambda;
            V.col(col + 1) = u.v;
            col += 2;
        } else {
            eigenvalues[col] = u.lambda;
            V.col(col) = u.v;
            ++col;
        }
    }

    meta.eig_condition = complex_condition(V);
    Eigen::MatrixXcd modes;
    if (compute_modes) {
        const Eigen::MatrixXcd Wc = W.cast<cplx>();
        Eigen::MatrixXcd coeffs;
        if (!(meta.eig_condition <= kNearDefective)) {
            meta.warnings.push_back("eigenvector matrix is near-defective (condition " +
                                    std::to_string(meta.eig_condition) +
                                    "); modes computed by least squares");
            coeffs = V.completeOrthogonalDecomposition().solve(Wc);
        } else {
            coeffs = V.partialPivLu().solve(Wc);
        }
        for (Eigen::Index s : pair_starts) {
            const Eigen::RowVectorXcd avg = 0.5 * (coeffs.row(s) + coeffs.row(s + 1).conjugate());
            coeffs.row(s) = avg;
            coeffs.row(s + 1) = avg.conjugate();
        }
        modes = coeffs.transpose();
    }
    return KoopmanModel(dict, K, std::move(eigenvalues), std::move(V), W, std::move(modes), std::move(meta));
}

Eigen::MatrixXcd eigenfunction_values(const KoopmanModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    return model.dictionary().evaluate_matrix(X).cast<cplx>() * model.V();
}

namespace {

Eigen::VectorXcd eigen_coordinates(const KoopmanModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0) {
    if (!model.has_modes()) throw ConfigurationError("model was fit without Koopman modes");
    const Eigen::VectorXd psi = model.dictionary().evaluate(x0);
    return model.V().transpose() * psi.cast<cplx>();
}

double realize(const Eigen::VectorXcd& y, Eigen::Ref<Eigen::VectorXd> out) {
    out = y.real();
    return y.size() > 0 ? y.imag().cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

Prediction predict(const KoopmanModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0, std::size_t k) {
    Eigen::VectorXcd z = eigen_coordinates(model, x0);
    const Eigen::VectorXcd& lam = model.eigenvalues();
    // Repeated multiplication keeps this bit-identical to predict_trajectory.
    for (std::size_t step = 0; step < k; ++step) z = z.cwiseProduct(lam);
    Prediction out;
    out.values.resize(model.modes().rows());
    out.max_imag = realize(model.modes() * z, out.values);
    return out;
}

Trajectory predict_trajectory(const KoopmanModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0,
                              std::size_t k_max) {
    Eigen::VectorXcd z = eigen_coordinates(model, x0);
    const Eigen::VectorXcd& lam = model.eigenvalues();
    Trajectory out;
    out.values.resize(static_cast<Eigen::Index>(k_max + 1), model.modes().rows());
    Eigen::VectorXd row(model.modes().rows());
    for (std::size_t k = 0; k <= k_max; ++k) {
        if (k > 0) z = z.cwiseProduct(lam);
        out.max_imag = std::max(out.max_imag, realize(model.modes() * z, row));
        out.values.row(static_cast<Eigen::Index>(k)) = row.transpose();
    }
    return out;
}

}  // namespace koopman
