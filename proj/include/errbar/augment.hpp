#pragma once

#include "errbar/data.hpp"
#include "errbar/ensemble.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Synthetic feature generation: sample uniformly inside the hypercube
// x +/- s around each scaled training point, clamping components to [0,1].
// The generated set always starts with the original rows, bit for bit.

namespace errbar {

enum class SeedAllocation { round_robin, random };

struct AugmentationConfig {
    double scale_factor = 0.1;  // hypercube half-width, in [0, 0.5]
    Eigen::Index n_total = 0;   // output rows including the originals
    std::uint64_t seed = 0;
    SeedAllocation allocation = SeedAllocation::round_robin;
};

struct AugmentedSet {
    Eigen::MatrixXd X_beta;                 // scaled space, every entry in [0,1]
    std::vector<Eigen::Index> origin_row;   // originals map to themselves
    std::vector<std::uint8_t> is_original;
    Eigen::Index n_original = 0;
};

// One sampled component: uniform over [x-s, x+s], then clamped to [0,1].
// Kept public so tests can recompute raw draws from the same counter stream.
inline double augment_component(double x, double s, double u) {
    const double v = (x - s) + 2.0 * s * u;
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

// Rows [0, n_original) are the input rows unchanged; each further row picks a
// seed row (round-robin by default) and draws every component from the
// counter stream keyed by (cfg.seed, row, component). Output is therefore
// independent of evaluation order, and prefixes are stable: growing n_total
// only appends rows.
AugmentedSet generate_augmented_features(const Eigen::MatrixXd& X_beta0,
                                         const AugmentationConfig& cfg);

// Label the augmented features with the calibrated ensemble's error bars;
// the result is the distilled model's training set.
Dataset build_beta_dataset(const AugmentedSet& aug, const EnsembleModel& e,
                           const std::vector<std::string>& feature_names = {});

// CSV schema: feature columns, origin_row, is_original, sigma_A.
void write_augmented_csv(const AugmentedSet& aug, const Eigen::VectorXd& sigma,
                         const std::vector<std::string>& feature_names,
                         const std::string& path);

}  // namespace errbar
