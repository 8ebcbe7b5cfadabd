#pragma once

// Feature-space constructions that keep the pooled mean and covariance of a
// set fixed (so FID cannot see them) while moving samples across class
// regions.

#include <cstddef>
#include <optional>

#include <json.hpp>

#include "cafd/linalg.hpp"
#include "cafd/tensor_io.hpp"

namespace cafd {

struct HackRecipe {
    std::size_t first = 0;
    std::size_t second = 1;
};

/// Fits the principal axes of `x` (all min(N, D) of them), standardizes the
/// coordinates on the two axes named by `recipe`, exchanges them, undoes the
/// standardization and maps back to feature space. The pooled mean and
/// covariance are unchanged.
///
/// Passing `basis` reuses a previously fitted model instead of refitting;
/// with a reused basis the operation is an involution.
FeatureMatrix axis_permutation_hack(const FeatureMatrix& x, const HackRecipe& recipe = {},
                                    const std::optional<PcaModel>& basis = std::nullopt);

/// The basis axis_permutation_hack fits when none is supplied.
PcaModel hack_basis(const FeatureMatrix& x);

struct PreservationReport {
    double mean_max_abs_dev = 0.0;  // ||mu_a - mu_b||_inf
    double cov_max_abs_dev = 0.0;   // ||C_a - C_b||_max
    double cov_relative_dev = 0.0;  // cov_max_abs_dev / ||C_a||_max
};

PreservationReport mean_cov_preservation_check(const FeatureMatrix& original,
                                               const FeatureMatrix& modified);

nlohmann::ordered_json to_json(const PreservationReport& r);
nlohmann::ordered_json to_json(const PcaModel& m);
PcaModel pca_model_from_json(const nlohmann::json& j);

}  // namespace cafd
