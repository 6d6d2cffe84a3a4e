#pragma once

#include "errbar/data.hpp"

#include <cstdint>

// Deterministic synthetic regression data for tests and desk-scale runs.
// The heteroscedastic profile (noise std growing along feature 0) is the
// default because it gives the error-bar models a signal worth learning.

namespace errbar {

enum class SynthFunction { linear, friedman_like, sine_mix };
enum class NoiseKind { homoscedastic, heteroscedastic };

struct SyntheticSpec {
    Eigen::Index n_samples = 200;
    Eigen::Index n_features = 10;
    SynthFunction function_tag = SynthFunction::friedman_like;
    NoiseKind noise_kind = NoiseKind::heteroscedastic;
    double noise_sigma = 0.2;  // base noise std
    double noise_slope = 2.0;  // heteroscedastic: std = sigma + slope * x0
    std::uint64_t seed = 0;
};

// Minimum feature count consumed by the target function.
Eigen::Index synth_active_inputs(SynthFunction f);

SynthFunction parse_synth_function(const std::string& name);
NoiseKind parse_noise_kind(const std::string& name);
std::string to_string(SynthFunction f);
std::string to_string(NoiseKind k);

// Features uniform in [0,1]^d from the seeded counter stream; target =
// function(features) + noise.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace errbar
