#pragma once

#include "errbar/augment.hpp"
#include "errbar/bundle.hpp"
#include "errbar/eval.hpp"
#include "errbar/nn.hpp"
#include "errbar/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// End-to-end orchestration: ingest -> scale -> accuracy model -> calibrated
// ensemble -> augment -> label -> distill -> evaluate -> persist. Every knob
// lives in RunConfig; a run is reproducible byte-for-byte from its config.

namespace errbar {

struct CsvSource {
    std::string path;
    std::string target_column;
    std::vector<std::string> feature_columns;  // empty = all non-target
};

struct RunConfig {
    std::uint64_t seed = 0;  // required in config files: no wall-clock seeding
    int threads = 1;
    std::string out_dir = "out";
    std::string dataset_name;  // defaults to the CSV stem or "synthetic"

    // Exactly one of the two sources.
    std::optional<CsvSource> csv;
    std::optional<SyntheticSpec> synthetic;

    MLPConfig model_a;
    std::optional<MLPConfig> model_b;  // defaults to model_a's architecture

    int ensemble_members = 20;
    int calibration_bins = 10;
    int calibration_folds = 5;
    double bootstrap_fraction = 1.0;

    std::vector<double> scale_factors{0.1};
    std::vector<Eigen::Index> sizes;  // empty = default desk-scale grid
    SeedAllocation allocation = SeedAllocation::round_robin;

    // Which augmented set the persisted distilled model trains on.
    std::optional<double> distill_scale_factor;   // default: min(scale_factors)
    std::optional<Eigen::Index> distill_n_total;  // default: max(sizes)

    int cv_k = 5;
    std::optional<Eigen::Index> n_max_report;  // default: max(sizes)

    MLPConfig model_b_or_default() const { return model_b ? *model_b : model_a; }
};

// Parse + validate. Both throw ValidationError with the offending field in
// the message.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
void validate_run_config(const RunConfig& cfg);

// Canonical snapshot with all defaults resolved; stored in bundle provenance.
nlohmann::json run_config_to_json(const RunConfig& cfg);

struct PipelineResult {
    ModelBundle bundle;
    std::vector<LearningCurvePoint> points;
    std::vector<StatsTableRow> table;
    std::string bundle_path;
    std::string curve_csv_path;
    std::string stats_csv_path;
    std::string plot_path;
};

// Runs every stage, logging one summary line per stage, and writes
// bundle.json, learning_curve.csv, stats_table.csv and learning_curve.svg
// under cfg.out_dir. Stage failures carry the stage name.
PipelineResult cmd_pipeline(const RunConfig& cfg);

// Batch prediction from a saved bundle: only the accuracy and distilled
// models run. Input columns must match the bundle's feature names (any
// order); output appends y_hat and sigma_hat.
void cmd_predict(const std::string& bundle_path, const std::string& input_csv,
                 const std::string& output_csv);

}  // namespace errbar
