#pragma once

// Feature, label and probability containers plus their file formats.
//
// Binary layout (".fvec" or any extension other than ".csv"):
//   bytes 0..7   magic "FVEC1\0\0\0"
//   bytes 8..11  u32 LE row count
//   bytes 12..15 u32 LE column count
//   then rows*cols float32 LE values, row-major.
//
// ".csv" files hold one row per line, comma separated. Label files that are
// neither ".csv" nor ".fvec" are plain text with one integer per line.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cafd {

inline constexpr std::array<char, 8> kFvecMagic = {'F', 'V', 'E', 'C', '1', '\0', '\0', '\0'};
inline constexpr std::size_t kFvecHeaderBytes = 16;

// Row-stochastic tolerance accepted when reading or constructing posteriors.
inline constexpr double kRowSumTolerance = 1e-6;
// Tolerance for a label marginal to count as a point on the simplex.
inline constexpr double kSimplexTolerance = 1e-9;

/// N x D matrix of encoded features, one sample per row. Every value is
/// finite; construction throws DataError naming the first offending cell.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(Eigen::MatrixXd values);

    static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }

    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    Eigen::MatrixXd values_;
};

/// Integer class ids in [0, n_classes).
class LabelVector {
public:
    LabelVector() = default;
    LabelVector(std::vector<std::size_t> labels, std::size_t n_classes);

    std::size_t size() const { return labels_.size(); }
    std::size_t n_classes() const { return n_classes_; }
    const std::vector<std::size_t>& labels() const { return labels_; }
    std::size_t operator[](std::size_t i) const { return labels_[i]; }

    LabelVector select(std::span<const std::size_t> indices) const;

    friend bool operator==(const LabelVector&, const LabelVector&) = default;

private:
    std::vector<std::size_t> labels_;
    std::size_t n_classes_ = 0;
};

/// N x K matrix of class posteriors p(y|x). Rows are validated to sum to one
/// within kRowSumTolerance and then renormalized to an exact unit sum.
class ProbabilityMatrix {
public:
    ProbabilityMatrix() = default;
    explicit ProbabilityMatrix(Eigen::MatrixXd values);

    static ProbabilityMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t n_classes() const { return static_cast<std::size_t>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }

    ProbabilityMatrix select_rows(std::span<const std::size_t> indices) const;

private:
    Eigen::MatrixXd values_;
};

/// Class distribution on the K-simplex: p(y) of generated data or p(y*) of
/// real data.
class LabelMarginal {
public:
    LabelMarginal() = default;
    explicit LabelMarginal(Eigen::VectorXd probs);

    static LabelMarginal uniform(std::size_t k);
    static LabelMarginal from_labels(const LabelVector& labels);
    /// Column means of the posterior matrix.
    static LabelMarginal from_probabilities(const ProbabilityMatrix& p);

    std::size_t n_classes() const { return static_cast<std::size_t>(probs_.size()); }
    const Eigen::VectorXd& probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

private:
    Eigen::VectorXd probs_;
};

// Generic dense matrix read/write with format chosen by extension.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);
void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);

FeatureMatrix read_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);

/// When `n_classes` is absent the class count is max(label) + 1.
LabelVector read_labels(const std::filesystem::path& path,
                        std::optional<std::size_t> n_classes = std::nullopt);
void write_labels(const LabelVector& labels, const std::filesystem::path& path);

ProbabilityMatrix read_probabilities(const std::filesystem::path& path);
void write_probabilities(const ProbabilityMatrix& p, const std::filesystem::path& path);

ProbabilityMatrix one_hot(const LabelVector& labels, std::size_t k);

/// Throws DimensionError unless feature dims agree, class counts agree and
/// each feature file has as many rows as its posterior file.
void validate_pair(const FeatureMatrix& real, const FeatureMatrix& gen,
                   const ProbabilityMatrix& real_p, const ProbabilityMatrix& gen_p);

std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace cafd
