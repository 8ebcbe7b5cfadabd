#pragma once

// Evaluation scores: Frechet distance between fitted Gaussians (FID), the
// class-aware variant over posterior-weighted class statistics (CAFD), the
// label-marginal KL term, Inception Score and Mode Score, and the composite
// report that bundles them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cafd/linalg.hpp"
#include "cafd/tensor_io.hpp"

namespace cafd {

// Additive smoothing applied to every probability before a KL divergence.
inline constexpr double kKlSmoothing = 1e-10;
// Negative Frechet values down to -kFrechetClamp * max(1, Tr(C_a) + Tr(C_b))
// are round-off and reported as zero.
inline constexpr double kFrechetClamp = 1e-8;

struct GaussianStats {
    Eigen::VectorXd mu;
    SymmetricMatrix c;

    std::size_t dim() const { return static_cast<std::size_t>(mu.size()); }
};

/// Gaussian mixture fitted from soft class assignments.
struct MixtureStats {
    LabelMarginal priors;
    std::vector<GaussianStats> components;
    /// sum_j p(y_i | x_j) per class.
    Eigen::VectorXd effective_mass;

    std::size_t n_classes() const { return components.size(); }
};

/// Column-normalized posteriors w_ij = p(y_i|x_j) / sum_j' p(y_i|x_j').
struct ClassWeights {
    Eigen::MatrixXd w;               // K x N; rows of skipped classes are zero
    Eigen::VectorXd mass;            // K
    std::vector<std::size_t> skipped;
};

/// max(2, 1e-3 * N): classes with less posterior mass carry too few samples
/// for a class-conditional covariance.
double mass_floor(std::size_t n_samples);

GaussianStats gaussian_stats(const FeatureMatrix& x);
GaussianStats gaussian_stats(const FeatureMatrix& x, const Eigen::VectorXd& weights);

/// ||mu_a - mu_b||^2 + Tr(C_a) + Tr(C_b) - 2 Tr((C_a C_b)^(1/2)).
/// `epsilon_reg` adds epsilon * I to both covariances first.
double frechet_distance(const GaussianStats& a, const GaussianStats& b, double epsilon_reg = 0.0);

double fid(const FeatureMatrix& real, const FeatureMatrix& gen, double epsilon_reg = 0.0);

ClassWeights class_weights(const ProbabilityMatrix& p);
ClassWeights class_weights(const ProbabilityMatrix& p, double floor);

/// Posterior-weighted class means and covariances. Every class with positive
/// mass gets exact statistics; classes with zero mass get zero mean and
/// covariance.
MixtureStats class_conditional_stats(const FeatureMatrix& x, const ProbabilityMatrix& p);

/// Pooled first and second moments of a mixture.
GaussianStats mixture_moments(const MixtureStats& m);

struct CafdResult {
    double value = 0.0;
    std::vector<std::optional<double>> per_class;  // nullopt for skipped classes
    std::vector<std::size_t> skipped;
};

CafdResult cafd(const FeatureMatrix& real_x, const ProbabilityMatrix& real_p,
                const FeatureMatrix& gen_x, const ProbabilityMatrix& gen_p,
                double epsilon_reg = 0.0);

double inception_score(const ProbabilityMatrix& p);
double mode_score(const ProbabilityMatrix& p_gen, const LabelMarginal& p_star);
double label_kld(const LabelMarginal& p_star, const LabelMarginal& p_gen);

/// Free parameters of a K-component, n-dimensional Gaussian mixture.
std::uint64_t mixture_degrees_of_freedom(std::uint64_t k, std::uint64_t n);
/// Free parameters of a single n-dimensional Gaussian.
std::uint64_t gaussian_degrees_of_freedom(std::uint64_t n);

struct EvalConfig {
    std::size_t splits = 1;
    std::optional<std::uint64_t> seed;  // required when splits > 1
    double epsilon_reg = 0.0;
    /// Ground-truth labels for the real set; p(y*) comes from these when
    /// present and from the real posteriors' column means otherwise.
    std::optional<LabelVector> real_labels;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

struct SplitSummary {
    std::size_t splits = 0;
    MeanStd fid;
    MeanStd cafd;
    MeanStd kld;
    MeanStd inception_score;
    MeanStd mode_score;
    std::vector<std::optional<MeanStd>> per_class_frechet;  // over splits where the class survived
};

struct MetricReport {
    double fid = 0.0;
    double cafd = 0.0;
    std::vector<std::optional<double>> per_class_frechet;
    double kld = 0.0;
    double inception_score = 1.0;
    double mode_score = 1.0;
    std::vector<std::size_t> skipped_classes;

    std::size_t n_classes = 0;
    std::size_t dim = 0;
    std::size_t n_real = 0;
    std::size_t n_gen = 0;

    std::optional<SplitSummary> split_mean_std;
};

MetricReport evaluate(const FeatureMatrix& real_x, const ProbabilityMatrix& real_p,
                      const FeatureMatrix& gen_x, const ProbabilityMatrix& gen_p,
                      const EvalConfig& config = {});

nlohmann::ordered_json to_json(const MetricReport& report);

/// Sample mean and (n-1)-normalized standard deviation.
MeanStd mean_std(const std::vector<double>& values);

}  // namespace cafd
