#pragma once

// Dense symmetric linear algebra shared by the metrics: (weighted) moments,
// symmetric eigendecomposition, PSD square roots, the Frechet trace term and
// PCA. Everything here is a pure function over immutable inputs.

#include <cstddef>

#include <Eigen/Dense>

#include "cafd/tensor_io.hpp"

namespace cafd {

// Relative tolerance for accepting an input as symmetric.
inline constexpr double kSymmetryTolerance = 1e-9;
// Eigenvalues in [-kPsdClipRelative * max|lambda|, 0) are treated as round-off
// and clamped to zero; anything more negative is a hard error.
inline constexpr double kPsdClipRelative = 1e-6;
// Tolerance for per-sample weights summing to one.
inline constexpr double kWeightSumTolerance = 1e-9;

/// Square matrix with |A_ij - A_ji| <= 1e-9 * max(1, |A_ij|). Stored exactly
/// symmetric: construction replaces A with (A + A^T) / 2.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(Eigen::MatrixXd values);

    static SymmetricMatrix identity(std::size_t dim);
    static SymmetricMatrix zero(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(values_.rows()); }
    const Eigen::MatrixXd& values() const { return values_; }
    double trace() const { return values_.trace(); }

private:
    Eigen::MatrixXd values_;
};

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // orthonormal columns, column i pairs with eigenvalues(i)
};

struct PcaModel {
    Eigen::VectorXd mean;                // D
    Eigen::MatrixXd components;          // k x D, orthonormal rows
    Eigen::VectorXd explained_variance;  // k, descending

    std::size_t n_components() const { return static_cast<std::size_t>(components.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(components.cols()); }

    /// (X - mean) * components^T, an N x k matrix.
    Eigen::MatrixXd project(const FeatureMatrix& x) const;
};

struct PcaResult {
    PcaModel model;
    Eigen::MatrixXd projected;  // N x k
};

Eigen::VectorXd mean_vector(const FeatureMatrix& x);
Eigen::VectorXd mean_vector(const FeatureMatrix& x, const Eigen::VectorXd& weights);

/// Population covariance sum_j w_j (x_j - mu)(x_j - mu)^T, with w_j = 1/N when
/// no weights are given. Throws ValidationError on N = 0 or bad weights.
SymmetricMatrix covariance(const FeatureMatrix& x);
SymmetricMatrix covariance(const FeatureMatrix& x, const Eigen::VectorXd& weights);
SymmetricMatrix covariance(const FeatureMatrix& x, const Eigen::VectorXd& weights,
                           const Eigen::VectorXd& mean);

EigenDecomposition sym_eig(const SymmetricMatrix& a);

/// Principal square root of a PSD matrix. Round-off negative eigenvalues are
/// clamped; materially negative ones raise NumericalError.
SymmetricMatrix sqrtm_psd(const SymmetricMatrix& a);

/// Tr((A B)^(1/2)) for PSD A, B, evaluated as Tr((A^(1/2) B A^(1/2))^(1/2)).
double trace_sqrt_product(const SymmetricMatrix& a, const SymmetricMatrix& b);

/// Top-k principal axes of covariance(x). In every component the entry of
/// largest magnitude is positive. Requires 1 <= k <= min(N, D).
PcaResult pca(const FeatureMatrix& x, std::size_t k);

/// Flips each column so that its largest-magnitude entry is positive.
void normalize_eigenvector_signs(Eigen::MatrixXd& columns);

}  // namespace cafd
