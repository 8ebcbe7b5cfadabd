#pragma once

// Seeded synthetic feature sets: Gaussian mixtures with one-hot posteriors,
// plus the two mode failures (dropping a class, blending two classes).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "cafd/linalg.hpp"
#include "cafd/tensor_io.hpp"

namespace cafd {

struct GmmSpec {
    std::size_t k = 1;
    std::size_t dim = 1;
    std::uint64_t seed = 0;
    LabelMarginal priors;
    std::vector<Eigen::VectorXd> means;       // k entries of length dim
    std::vector<SymmetricMatrix> covariances;  // k PSD matrices

    /// Throws ValidationError / DimensionError / NumericalError when the
    /// fields disagree or a covariance is not PSD.
    void validate() const;
};

/// {k, dim, seed, priors, means, covariances}; covariances may be omitted
/// (identity for every class) and priors may be omitted (uniform).
GmmSpec gmm_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const GmmSpec& spec);
GmmSpec read_gmm_spec(const std::filesystem::path& path);

struct LabeledSet {
    FeatureMatrix x;
    LabelVector labels;
    ProbabilityMatrix p;
};

LabeledSet sample_gmm(const GmmSpec& spec, std::size_t n);

/// Removes every sample labelled `drop_class`; the class count is unchanged.
LabeledSet mode_drop(const LabeledSet& set, std::size_t drop_class);

/// Pairs members of `class_a` with members of `class_b` uniformly at random
/// without replacement and moves each partner `blend` of the way towards the
/// other (0.5 gives the midpoint). Unpaired leftovers keep their features.
/// Every member of either class gets posterior 0.5/0.5 over the two classes.
LabeledSet mode_collapse(const LabeledSet& set, std::size_t class_a, std::size_t class_b,
                         double blend, std::uint64_t seed);

}  // namespace cafd
