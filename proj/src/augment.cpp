#include "errbar/augment.hpp"

#include "errbar/errors.hpp"
#include "errbar/rng.hpp"
#include "errbar/util.hpp"

#include <fstream>
#include <string>

namespace errbar {
namespace {

// Slot reserved for the random seed-row choice so it can never collide with
// a component slot.
constexpr std::uint64_t kAllocationSlot = 0x7fffffffffffffffull;

}  // namespace

AugmentedSet generate_augmented_features(const Eigen::MatrixXd& X_beta0,
                                         const AugmentationConfig& cfg) {
    const Eigen::Index n0 = X_beta0.rows();
    const Eigen::Index d = X_beta0.cols();
    if (n0 < 1) throw ValidationError("augmentation: no seed rows");
    if (!(cfg.scale_factor >= 0.0 && cfg.scale_factor <= 0.5)) {
        throw ValidationError("scale_factor " + format_double(cfg.scale_factor) +
                              " outside the allowed range 0 to 0.5");
    }
    if (cfg.n_total < n0) {
        throw ValidationError("n_total " + std::to_string(cfg.n_total) +
                              " is smaller than the " + std::to_string(n0) + " original rows");
    }
    for (Eigen::Index i = 0; i < n0; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double v = X_beta0(i, j);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ValidationError("augmentation seed entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") = " + format_double(v) +
                                      " outside [0,1]; scale features first");
            }
        }
    }

    AugmentedSet aug;
    aug.n_original = n0;
    aug.X_beta.resize(cfg.n_total, d);
    aug.X_beta.topRows(n0) = X_beta0;
    aug.origin_row.resize(static_cast<std::size_t>(cfg.n_total));
    aug.is_original.assign(static_cast<std::size_t>(cfg.n_total), 0);
    for (Eigen::Index i = 0; i < n0; ++i) {
        aug.origin_row[static_cast<std::size_t>(i)] = i;
        aug.is_original[static_cast<std::size_t>(i)] = 1;
    }

    const double s = cfg.scale_factor;
    for (Eigen::Index i = n0; i < cfg.n_total; ++i) {
        const auto counter = static_cast<std::uint64_t>(i);
        Eigen::Index seed_row;
        if (cfg.allocation == SeedAllocation::round_robin) {
            seed_row = (i - n0) % n0;
        } else {
            seed_row = static_cast<Eigen::Index>(
                counter_below(cfg.seed, counter, kAllocationSlot,
                              static_cast<std::uint64_t>(n0)));
        }
        aug.origin_row[static_cast<std::size_t>(i)] = seed_row;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double u = counter_uniform(cfg.seed, counter, static_cast<std::uint64_t>(j));
            aug.X_beta(i, j) = augment_component(X_beta0(seed_row, j), s, u);
        }
    }
    return aug;
}

Dataset build_beta_dataset(const AugmentedSet& aug, const EnsembleModel& e,
                           const std::vector<std::string>& feature_names) {
    if (aug.X_beta.cols() != e.input_dim()) {
        throw ValidationError("augmented set has " + std::to_string(aug.X_beta.cols()) +
                              " features, ensemble expects " + std::to_string(e.input_dim()));
    }
    Dataset beta;
    beta.features = aug.X_beta;
    beta.targets = label_error_bars(e, aug.X_beta);
    if (feature_names.empty()) {
        for (Eigen::Index j = 0; j < aug.X_beta.cols(); ++j) {
            beta.feature_names.push_back("f" + std::to_string(j));
        }
    } else {
        if (static_cast<Eigen::Index>(feature_names.size()) != aug.X_beta.cols()) {
            throw ValidationError("feature name count does not match augmented set");
        }
        beta.feature_names = feature_names;
    }
    beta.target_name = "sigma_A";
    beta.space = FeatureSpace::scaled;
    return beta;
}

void write_augmented_csv(const AugmentedSet& aug, const Eigen::VectorXd& sigma,
                         const std::vector<std::string>& feature_names,
                         const std::string& path) {
    if (sigma.size() != aug.X_beta.rows()) {
        throw ValidationError("sigma length does not match augmented rows");
    }
    if (static_cast<Eigen::Index>(feature_names.size()) != aug.X_beta.cols()) {
        throw ValidationError("feature name count does not match augmented set");
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    for (const auto& name : feature_names) out << name << ',';
    out << "origin_row,is_original,sigma_A\n";
    for (Eigen::Index i = 0; i < aug.X_beta.rows(); ++i) {
        for (Eigen::Index j = 0; j < aug.X_beta.cols(); ++j) {
            out << format_double(aug.X_beta(i, j)) << ',';
        }
        out << aug.origin_row[static_cast<std::size_t>(i)] << ','
            << static_cast<int>(aug.is_original[static_cast<std::size_t>(i)]) << ','
            << format_double(sigma[i]) << '\n';
    }
}

}  // namespace errbar
