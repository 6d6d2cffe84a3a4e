#include "errbar/synth.hpp"

#include "errbar/errors.hpp"
#include "errbar/rng.hpp"

#include <cmath>
#include <string>

namespace errbar {
namespace {

constexpr double kPi = 3.14159265358979323846;

double target_value(SynthFunction f, const Eigen::MatrixXd& X, Eigen::Index i) {
    switch (f) {
        case SynthFunction::linear:
            return X.row(i).sum();
        case SynthFunction::friedman_like:
            return 10.0 * std::sin(kPi * X(i, 0) * X(i, 1)) +
                   20.0 * (X(i, 2) - 0.5) * (X(i, 2) - 0.5) + 10.0 * X(i, 3) + 5.0 * X(i, 4);
        case SynthFunction::sine_mix:
            return std::sin(2.0 * kPi * X(i, 0)) + 0.5 * std::sin(4.0 * kPi * X(i, 1)) + X(i, 2);
    }
    throw ValidationError("unknown synthetic function");
}

}  // namespace

Eigen::Index synth_active_inputs(SynthFunction f) {
    switch (f) {
        case SynthFunction::linear: return 1;
        case SynthFunction::friedman_like: return 5;
        case SynthFunction::sine_mix: return 3;
    }
    return 1;
}

SynthFunction parse_synth_function(const std::string& name) {
    if (name == "linear") return SynthFunction::linear;
    if (name == "friedman") return SynthFunction::friedman_like;
    if (name == "sine-mix") return SynthFunction::sine_mix;
    throw ValidationError("unknown synthetic function '" + name +
                          "' (expected linear, friedman or sine-mix)");
}

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "homoscedastic") return NoiseKind::homoscedastic;
    if (name == "heteroscedastic") return NoiseKind::heteroscedastic;
    throw ValidationError("unknown noise profile '" + name +
                          "' (expected homoscedastic or heteroscedastic)");
}

std::string to_string(SynthFunction f) {
    switch (f) {
        case SynthFunction::linear: return "linear";
        case SynthFunction::friedman_like: return "friedman";
        case SynthFunction::sine_mix: return "sine-mix";
    }
    return "?";
}

std::string to_string(NoiseKind k) {
    return k == NoiseKind::homoscedastic ? "homoscedastic" : "heteroscedastic";
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 1) throw ValidationError("synthetic: n_samples must be >= 1");
    if (spec.n_features < synth_active_inputs(spec.function_tag)) {
        throw ValidationError("synthetic: function '" + to_string(spec.function_tag) +
                              "' needs at least " +
                              std::to_string(synth_active_inputs(spec.function_tag)) +
                              " features, got " + std::to_string(spec.n_features));
    }
    if (spec.noise_sigma < 0.0 || spec.noise_slope < 0.0) {
        throw ValidationError("synthetic: noise parameters must be non-negative");
    }

    const std::uint64_t feat_key = substream_seed(spec.seed, {tag::kSynthFeatures});
    const std::uint64_t noise_key = substream_seed(spec.seed, {tag::kSynthNoise});

    Dataset d;
    d.features.resize(spec.n_samples, spec.n_features);
    d.targets.resize(spec.n_samples);
    for (Eigen::Index i = 0; i < spec.n_samples; ++i) {
        for (Eigen::Index j = 0; j < spec.n_features; ++j) {
            d.features(i, j) = counter_uniform(feat_key, static_cast<std::uint64_t>(i),
                                               static_cast<std::uint64_t>(j));
        }
        double y = target_value(spec.function_tag, d.features, i);
        const double std_dev = spec.noise_kind == NoiseKind::homoscedastic
                                   ? spec.noise_sigma
                                   : spec.noise_sigma + spec.noise_slope * d.features(i, 0);
        if (std_dev > 0.0) {
            y += std_dev * counter_gaussian(noise_key, static_cast<std::uint64_t>(i), 0);
        }
        d.targets[i] = y;
    }
    for (Eigen::Index j = 0; j < spec.n_features; ++j) {
        d.feature_names.push_back("f" + std::to_string(j));
    }
    d.target_name = "y";
    d.space = FeatureSpace::raw;
    return d;
}

}  // namespace errbar
