#include "cafd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cafd/errors.hpp"

namespace cafd {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

void check_weights(const FeatureMatrix& x, const Eigen::VectorXd& w) {
    if (static_cast<std::size_t>(w.size()) != x.rows()) {
        throw ValidationError("weight vector has " + std::to_string(w.size()) + " entries for " +
                              std::to_string(x.rows()) + " samples");
    }
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (!std::isfinite(w(j)) || w(j) < 0.0) {
            throw ValidationError("weight " + std::to_string(j) + " is negative or non-finite");
        }
    }
    if (std::abs(w.sum() - 1.0) > kWeightSumTolerance) {
        throw ValidationError("weights sum to " + std::to_string(w.sum()) + ", not 1");
    }
}

Eigen::VectorXd uniform_weights(std::size_t n) {
    if (n == 0) throw ValidationError("moments of an empty sample are undefined");
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

// Eigenvalues of a PSD matrix with the round-off clamp applied.
Eigen::VectorXd clamped_psd_eigenvalues(Eigen::VectorXd values, const char* what) {
    if (values.size() == 0) return values;
    const double scale = values.cwiseAbs().maxCoeff();
    const double clip = kPsdClipRelative * scale;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values(i) < -clip) {
            throw NumericalError(std::string(what) + " is not positive semidefinite: eigenvalue " +
                                 std::to_string(values(i)) + " below clamp threshold -" +
                                 std::to_string(clip));
        }
        values(i) = std::max(values(i), 0.0);
    }
    return values;
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(Eigen::MatrixXd values) {
    if (values.rows() != values.cols()) {
        throw DimensionError("symmetric matrix must be square, got " +
                             shape_string(values.rows(), values.cols()));
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double aij = values(i, j);
            const double aji = values(j, i);
            if (!std::isfinite(aij) || !std::isfinite(aji)) {
                throw DataError("non-finite matrix entry at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
            }
            if (std::abs(aij - aji) > kSymmetryTolerance * std::max(1.0, std::abs(aij))) {
                throw DataError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
            }
        }
    }
    values_ = symmetrized(values);
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return SymmetricMatrix(Eigen::MatrixXd::Identity(d, d));
}

SymmetricMatrix SymmetricMatrix::zero(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return SymmetricMatrix(Eigen::MatrixXd::Zero(d, d));
}

Eigen::MatrixXd PcaModel::project(const FeatureMatrix& x) const {
    if (x.cols() != dim()) {
        throw DimensionError("PCA basis has dimension " + std::to_string(dim()) +
                             ", features have " + std::to_string(x.cols()));
    }
    return (x.values().rowwise() - mean.transpose()) * components.transpose();
}

Eigen::VectorXd mean_vector(const FeatureMatrix& x) { return mean_vector(x, uniform_weights(x.rows())); }

Eigen::VectorXd mean_vector(const FeatureMatrix& x, const Eigen::VectorXd& weights) {
    check_weights(x, weights);
    return x.values().transpose() * weights;
}

SymmetricMatrix covariance(const FeatureMatrix& x) { return covariance(x, uniform_weights(x.rows())); }

SymmetricMatrix covariance(const FeatureMatrix& x, const Eigen::VectorXd& weights) {
    if (x.rows() == 0) throw ValidationError("moments of an empty sample are undefined");
    return covariance(x, weights, mean_vector(x, weights));
}

SymmetricMatrix covariance(const FeatureMatrix& x, const Eigen::VectorXd& weights,
                           const Eigen::VectorXd& mean) {
    if (x.rows() == 0) throw ValidationError("moments of an empty sample are undefined");
    check_weights(x, weights);
    if (static_cast<std::size_t>(mean.size()) != x.cols()) {
        throw DimensionError("mean has " + std::to_string(mean.size()) + " entries for " +
                             std::to_string(x.cols()) + " features");
    }
    const Eigen::MatrixXd centered = x.values().rowwise() - mean.transpose();
    const Eigen::MatrixXd weighted = centered.array().colwise() * weights.array();
    return SymmetricMatrix(symmetrized(weighted.transpose() * centered));
}

EigenDecomposition sym_eig(const SymmetricMatrix& a) {
    EigenDecomposition out;
    if (a.dim() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.values(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge (" + std::to_string(a.dim()) +
                             "x" + std::to_string(a.dim()) + ")");
    }
    // Eigen returns ascending order.
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

SymmetricMatrix sqrtm_psd(const SymmetricMatrix& a) {
    if (a.dim() == 0) return a;
    const auto eig = sym_eig(a);
    const Eigen::VectorXd roots = clamped_psd_eigenvalues(eig.eigenvalues, "matrix").cwiseSqrt();
    const Eigen::MatrixXd s = eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.transpose();
    return SymmetricMatrix(symmetrized(s));
}

double trace_sqrt_product(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("trace_sqrt_product: " + std::to_string(a.dim()) + "x" +
                             std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + "x" +
                             std::to_string(b.dim()));
    }
    if (a.dim() == 0) return 0.0;
    const auto root_a = sqrtm_psd(a);
    // Make sure B itself is PSD before forming the sandwich.
    (void)clamped_psd_eigenvalues(
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b.values(), Eigen::EigenvaluesOnly).eigenvalues(),
        "second matrix");
    const Eigen::MatrixXd sandwich = symmetrized(root_a.values() * b.values() * root_a.values());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sandwich, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge in trace_sqrt_product");
    }
    const Eigen::VectorXd values = clamped_psd_eigenvalues(solver.eigenvalues(), "A^1/2 B A^1/2");
    // Sum in descending order of magnitude for a fixed reduction order.
    double sum = 0.0;
    for (Eigen::Index i = values.size() - 1; i >= 0; --i) sum += std::sqrt(values(i));
    return sum;
}

void normalize_eigenvector_signs(Eigen::MatrixXd& columns) {
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        Eigen::Index arg = 0;
        columns.col(c).cwiseAbs().maxCoeff(&arg);
        if (columns(arg, c) < 0.0) columns.col(c) = -columns.col(c);
    }
}

PcaResult pca(const FeatureMatrix& x, std::size_t k) {
    const std::size_t limit = std::min(x.rows(), x.cols());
    if (k == 0 || k > limit) {
        throw ValidationError("PCA component count " + std::to_string(k) + " out of range [1, " +
                              std::to_string(limit) + "] for " + shape_string(x.rows(), x.cols()) +
                              " input");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    PcaResult out;
    out.model.mean = mean_vector(x);
    const auto eig = sym_eig(covariance(x, Eigen::VectorXd::Constant(
                                               static_cast<Eigen::Index>(x.rows()),
                                               1.0 / static_cast<double>(x.rows())),
                                        out.model.mean));
    Eigen::MatrixXd vectors = eig.eigenvectors.leftCols(kk);
    normalize_eigenvector_signs(vectors);
    out.model.components = vectors.transpose();
    out.model.explained_variance = eig.eigenvalues.head(kk).cwiseMax(0.0);
    out.projected = out.model.project(x);
    return out;
}

}  // namespace cafd
