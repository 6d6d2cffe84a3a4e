#include "errbar/pipeline.hpp"

#include "errbar/errors.hpp"
#include "errbar/plot.hpp"
#include "errbar/rng.hpp"
#include "errbar/util.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

namespace errbar {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ValidationError("config: unknown key '" + key + "' in " + where);
        }
    }
}

MLPConfig parse_mlp_config(const json& j, const std::string& where) {
    expect_keys(j,
                {"hidden_widths", "epochs", "learning_rate", "batch_size", "adam_beta1",
                 "adam_beta2", "adam_epsilon"},
                where);
    MLPConfig c;
    if (j.contains("hidden_widths")) c.hidden_widths = j["hidden_widths"].get<std::vector<int>>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("adam_beta1")) c.adam_beta1 = j["adam_beta1"].get<double>();
    if (j.contains("adam_beta2")) c.adam_beta2 = j["adam_beta2"].get<double>();
    if (j.contains("adam_epsilon")) c.adam_epsilon = j["adam_epsilon"].get<double>();
    return c;
}

json mlp_config_to_json(const MLPConfig& c) {
    return json{{"hidden_widths", c.hidden_widths},
                {"epochs", c.epochs},
                {"learning_rate", c.learning_rate},
                {"batch_size", c.batch_size},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_epsilon", c.adam_epsilon}};
}

// Stage wrapper: failures carry the stage name, successes log one line.
template <typename F>
auto stage(const std::string& name, F&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError("stage " + name + ": " + e.what());
    } catch (const TrainingError& e) {
        throw TrainingError("stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error("stage " + name + ": " + e.what());
    }
}

void log_line(const std::string& stage_name, const std::string& message) {
    std::cout << "[pipeline] " << stage_name << ": " << message << '\n' << std::flush;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    expect_keys(j,
                {"seed", "threads", "out_dir", "dataset_name", "dataset", "model_a", "model_b",
                 "ensemble", "augment", "distill", "cv_k", "n_max_report"},
                "top level");
    RunConfig cfg;
    if (!j.contains("seed")) {
        throw ValidationError("config: 'seed' is required; runs must be explicitly seeded");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("dataset_name")) cfg.dataset_name = j["dataset_name"].get<std::string>();

    if (!j.contains("dataset")) throw ValidationError("config: 'dataset' is required");
    const json& ds = j["dataset"];
    expect_keys(ds, {"csv", "target", "features", "synthetic"}, "dataset");
    if (ds.contains("csv") == ds.contains("synthetic")) {
        throw ValidationError("config: dataset needs exactly one of 'csv' or 'synthetic'");
    }
    if (ds.contains("csv")) {
        CsvSource src;
        src.path = ds["csv"].get<std::string>();
        if (!ds.contains("target")) {
            throw ValidationError("config: dataset.target is required with dataset.csv");
        }
        src.target_column = ds["target"].get<std::string>();
        if (ds.contains("features")) {
            src.feature_columns = ds["features"].get<std::vector<std::string>>();
        }
        cfg.csv = std::move(src);
    } else {
        const json& sy = ds["synthetic"];
        expect_keys(sy,
                    {"n_samples", "n_features", "function", "noise", "noise_sigma",
                     "noise_slope", "seed"},
                    "dataset.synthetic");
        SyntheticSpec spec;
        if (sy.contains("n_samples")) spec.n_samples = sy["n_samples"].get<Eigen::Index>();
        if (sy.contains("n_features")) spec.n_features = sy["n_features"].get<Eigen::Index>();
        if (sy.contains("function")) {
            spec.function_tag = parse_synth_function(sy["function"].get<std::string>());
        }
        if (sy.contains("noise")) spec.noise_kind = parse_noise_kind(sy["noise"].get<std::string>());
        if (sy.contains("noise_sigma")) spec.noise_sigma = sy["noise_sigma"].get<double>();
        if (sy.contains("noise_slope")) spec.noise_slope = sy["noise_slope"].get<double>();
        spec.seed = sy.contains("seed") ? sy["seed"].get<std::uint64_t>() : cfg.seed;
        cfg.synthetic = spec;
    }

    if (j.contains("model_a")) cfg.model_a = parse_mlp_config(j["model_a"], "model_a");
    if (j.contains("model_b")) cfg.model_b = parse_mlp_config(j["model_b"], "model_b");

    if (j.contains("ensemble")) {
        const json& en = j["ensemble"];
        expect_keys(en, {"members", "calibration_bins", "calibration_folds", "bootstrap_fraction"},
                    "ensemble");
        if (en.contains("members")) cfg.ensemble_members = en["members"].get<int>();
        if (en.contains("calibration_bins")) {
            cfg.calibration_bins = en["calibration_bins"].get<int>();
        }
        if (en.contains("calibration_folds")) {
            cfg.calibration_folds = en["calibration_folds"].get<int>();
        }
        if (en.contains("bootstrap_fraction")) {
            cfg.bootstrap_fraction = en["bootstrap_fraction"].get<double>();
        }
    }

    if (j.contains("augment")) {
        const json& au = j["augment"];
        expect_keys(au, {"scale_factors", "sizes", "allocation"}, "augment");
        if (au.contains("scale_factors")) {
            cfg.scale_factors = au["scale_factors"].get<std::vector<double>>();
        }
        if (au.contains("sizes")) cfg.sizes = au["sizes"].get<std::vector<Eigen::Index>>();
        if (au.contains("allocation")) {
            const auto name = au["allocation"].get<std::string>();
            if (name == "round-robin") {
                cfg.allocation = SeedAllocation::round_robin;
            } else if (name == "random") {
                cfg.allocation = SeedAllocation::random;
            } else {
                throw ValidationError("config: augment.allocation must be round-robin or random");
            }
        }
    }

    if (j.contains("distill")) {
        const json& di = j["distill"];
        expect_keys(di, {"scale_factor", "n_total"}, "distill");
        if (di.contains("scale_factor")) {
            cfg.distill_scale_factor = di["scale_factor"].get<double>();
        }
        if (di.contains("n_total")) cfg.distill_n_total = di["n_total"].get<Eigen::Index>();
    }

    if (j.contains("cv_k")) cfg.cv_k = j["cv_k"].get<int>();
    if (j.contains("n_max_report")) cfg.n_max_report = j["n_max_report"].get<Eigen::Index>();

    validate_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    try {
        return parse_run_config(j);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.csv.has_value() == cfg.synthetic.has_value()) {
        throw ValidationError("config: exactly one data source (csv or synthetic) is required");
    }
    if (cfg.csv && !fs::exists(cfg.csv->path)) {
        throw ValidationError("config: dataset file '" + cfg.csv->path + "' does not exist");
    }
    if (cfg.threads < 1) throw ValidationError("config: threads must be >= 1");
    if (cfg.ensemble_members < 2) throw ValidationError("config: ensemble.members must be >= 2");
    if (cfg.calibration_bins < 1) {
        throw ValidationError("config: ensemble.calibration_bins must be >= 1");
    }
    if (cfg.calibration_folds < 2) {
        throw ValidationError("config: ensemble.calibration_folds must be >= 2");
    }
    if (!(cfg.bootstrap_fraction > 0.0 && cfg.bootstrap_fraction <= 1.0)) {
        throw ValidationError("config: ensemble.bootstrap_fraction must lie in (0, 1]");
    }
    if (cfg.scale_factors.empty()) {
        throw ValidationError("config: augment.scale_factors must not be empty");
    }
    for (const double s : cfg.scale_factors) {
        if (!(s >= 0.0 && s <= 0.5)) {
            throw ValidationError("config: scale factor " + format_double(s) +
                                  " outside the allowed range 0 to 0.5");
        }
    }
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
        if (cfg.sizes[i] < 1) throw ValidationError("config: augment.sizes must be positive");
        if (i > 0 && cfg.sizes[i] <= cfg.sizes[i - 1]) {
            throw ValidationError("config: augment.sizes must be strictly ascending");
        }
    }
    if (cfg.distill_scale_factor &&
        !(*cfg.distill_scale_factor >= 0.0 && *cfg.distill_scale_factor <= 0.5)) {
        throw ValidationError("config: distill.scale_factor " +
                              format_double(*cfg.distill_scale_factor) +
                              " outside the allowed range 0 to 0.5");
    }
    if (cfg.cv_k < 2) throw ValidationError("config: cv_k must be >= 2");
    validate_config(cfg.model_a);
    if (cfg.model_b) validate_config(*cfg.model_b);
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir;
    j["dataset_name"] = cfg.dataset_name;
    if (cfg.csv) {
        j["dataset"] = json{{"csv", cfg.csv->path},
                            {"target", cfg.csv->target_column},
                            {"features", cfg.csv->feature_columns}};
    } else {
        const SyntheticSpec& s = *cfg.synthetic;
        j["dataset"] = json{{"synthetic",
                             json{{"n_samples", s.n_samples},
                                  {"n_features", s.n_features},
                                  {"function", to_string(s.function_tag)},
                                  {"noise", to_string(s.noise_kind)},
                                  {"noise_sigma", s.noise_sigma},
                                  {"noise_slope", s.noise_slope},
                                  {"seed", s.seed}}}};
    }
    j["model_a"] = mlp_config_to_json(cfg.model_a);
    j["model_b"] = mlp_config_to_json(cfg.model_b_or_default());
    j["ensemble"] = json{{"members", cfg.ensemble_members},
                         {"calibration_bins", cfg.calibration_bins},
                         {"calibration_folds", cfg.calibration_folds},
                         {"bootstrap_fraction", cfg.bootstrap_fraction}};
    j["augment"] = json{{"scale_factors", cfg.scale_factors},
                        {"sizes", cfg.sizes},
                        {"allocation", cfg.allocation == SeedAllocation::round_robin
                                           ? "round-robin"
                                           : "random"}};
    json distill;
    if (cfg.distill_scale_factor) distill["scale_factor"] = *cfg.distill_scale_factor;
    if (cfg.distill_n_total) distill["n_total"] = *cfg.distill_n_total;
    j["distill"] = distill;
    j["cv_k"] = cfg.cv_k;
    if (cfg.n_max_report) j["n_max_report"] = *cfg.n_max_report;
    return j;
}

PipelineResult cmd_pipeline(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    validate_run_config(cfg);

    const Dataset alpha_raw = stage("ingest", [&] {
        Dataset d = cfg.csv ? load_dataset_csv(cfg.csv->path, cfg.csv->target_column,
                                               cfg.csv->feature_columns)
                            : generate_synthetic(*cfg.synthetic);
        validate_dataset(d);
        return d;
    });
    if (cfg.dataset_name.empty()) {
        cfg.dataset_name = cfg.csv ? fs::path(cfg.csv->path).stem().string() : "synthetic";
    }
    log_line("ingest", std::to_string(alpha_raw.n_rows()) + " rows, " +
                           std::to_string(alpha_raw.n_features()) + " features (" +
                           cfg.dataset_name + ")");

    // Resolve data-dependent defaults.
    const Eigen::Index n0 = alpha_raw.n_rows();
    if (cfg.sizes.empty()) {
        for (const Eigen::Index n : {n0, Eigen::Index{1000}, Eigen::Index{3000},
                                     Eigen::Index{10000}, Eigen::Index{30000},
                                     Eigen::Index{100000}}) {
            if (n >= n0 && (cfg.sizes.empty() || n > cfg.sizes.back())) cfg.sizes.push_back(n);
        }
    }
    for (const Eigen::Index n : cfg.sizes) {
        if (n < n0) {
            throw ValidationError("config: augment size " + std::to_string(n) +
                                  " is smaller than the dataset (" + std::to_string(n0) + ")");
        }
    }
    if (!cfg.n_max_report) cfg.n_max_report = cfg.sizes.back();
    if (!cfg.distill_scale_factor) {
        cfg.distill_scale_factor =
            *std::min_element(cfg.scale_factors.begin(), cfg.scale_factors.end());
    }
    if (!cfg.distill_n_total) cfg.distill_n_total = cfg.sizes.back();

    const auto [scaler, alpha_scaled] = stage("scale", [&] {
        MinMaxScaler s = fit_scaler(alpha_raw);
        return std::make_pair(s, apply_scaler(s, alpha_raw));
    });
    log_line("scale", std::to_string(alpha_scaled.n_features()) + " columns mapped to [0,1], " +
                          std::to_string(scaler.degenerate_cols.size()) + " degenerate");

    MLPConfig cfg_a = cfg.model_a;
    cfg_a.init_seed = substream_seed(cfg.seed, {tag::kModelA, 0});
    cfg_a.shuffle_seed = substream_seed(cfg.seed, {tag::kModelA, 1});
    const auto [model_a, report_a] = stage("train-a", [&] {
        return train_mlp(alpha_scaled.features, alpha_scaled.targets, cfg_a);
    });
    log_line("train-a", "final training MSE " + format_double(report_a.final_loss) + " after " +
                            std::to_string(cfg_a.epochs) + " epochs");

    const EnsembleModel ensemble = stage("train-ensemble", [&] {
        return train_calibrated_ensemble(alpha_scaled, cfg.ensemble_members, cfg.model_a,
                                         cfg.calibration_bins,
                                         substream_seed(cfg.seed, {tag::kFinalEnsemble}),
                                         cfg.calibration_folds, cfg.threads,
                                         cfg.bootstrap_fraction);
    });
    log_line("train-ensemble",
             std::to_string(cfg.ensemble_members) + " members, calibration " +
                 ensemble.calibration.method_tag + " a=" +
                 format_double(ensemble.calibration.a) + " b=" +
                 format_double(ensemble.calibration.b));

    const std::vector<LearningCurvePoint> points = stage("curve", [&] {
        return run_learning_curve(alpha_scaled.features, ensemble, cfg.scale_factors, cfg.sizes,
                                  cfg.model_b_or_default(),
                                  substream_seed(cfg.seed, {tag::kCurve}), cfg.cv_k, cfg.threads,
                                  /*log_progress=*/true);
    });
    const std::vector<StatsTableRow> table =
        stage("stats", [&] { return stats_table(points, *cfg.n_max_report); });
    log_line("curve", std::to_string(points.size()) + " learning-curve points, " +
                          std::to_string(table.size()) + " stats rows");

    const DistilledModel model_b = stage("distill", [&] {
        AugmentationConfig acfg;
        acfg.scale_factor = *cfg.distill_scale_factor;
        acfg.n_total = *cfg.distill_n_total;
        acfg.allocation = cfg.allocation;
        acfg.seed = substream_seed(
            cfg.seed, {tag::kModelB, tag::kAugment, std::bit_cast<std::uint64_t>(acfg.scale_factor)});
        const AugmentedSet aug = generate_augmented_features(alpha_scaled.features, acfg);
        const Dataset beta = build_beta_dataset(aug, ensemble, alpha_scaled.feature_names);
        MLPConfig cfg_b = cfg.model_b_or_default();
        cfg_b.init_seed = substream_seed(cfg.seed, {tag::kModelB, 0});
        cfg_b.shuffle_seed = substream_seed(cfg.seed, {tag::kModelB, 1});
        return train_model_b(beta, cfg_b);
    });
    log_line("distill", "distilled model trained on " +
                            std::to_string(*cfg.distill_n_total) + " rows at s=" +
                            format_double(*cfg.distill_scale_factor));

    PipelineResult result;
    result.points = points;
    result.table = table;

    stage("report", [&] {
        fs::create_directories(cfg.out_dir);
        result.curve_csv_path = (fs::path(cfg.out_dir) / "learning_curve.csv").string();
        result.stats_csv_path = (fs::path(cfg.out_dir) / "stats_table.csv").string();
        result.plot_path = (fs::path(cfg.out_dir) / "learning_curve.svg").string();
        write_learning_curve_csv(points, cfg.dataset_name, result.curve_csv_path);
        write_stats_table_csv(table, cfg.dataset_name, result.stats_csv_path);
        emit_curve_plot(points, result.plot_path);
        return 0;
    });
    log_line("report", "wrote learning_curve.csv, stats_table.csv, learning_curve.svg");

    stage("bundle", [&] {
        ModelBundle b;
        b.alpha_scaler = scaler;
        b.model_a = model_a;
        b.ensemble = ensemble;
        b.model_b = model_b;
        b.feature_names = alpha_raw.feature_names;
        b.target_name = alpha_raw.target_name;
        b.provenance = nlohmann::json{{"config", run_config_to_json(cfg)},
                                      {"data_hash", to_hex(hash_dataset(alpha_raw))},
                                      {"n_rows", alpha_raw.n_rows()}};
        result.bundle_path = (fs::path(cfg.out_dir) / "bundle.json").string();
        save_bundle(b, result.bundle_path);
        result.bundle = std::move(b);
        return 0;
    });
    log_line("bundle", "saved " + result.bundle_path);

    return result;
}

void cmd_predict(const std::string& bundle_path, const std::string& input_csv,
                 const std::string& output_csv) {
    const ModelBundle bundle = load_bundle(bundle_path);
    if (!bundle.model_b) {
        throw ValidationError(bundle_path + ": bundle is not distilled (no model_b); "
                              "run the pipeline or distill stage first");
    }

    const CsvTable table = read_csv_table(input_csv);

    // Exact column-set match, any order.
    std::vector<Eigen::Index> col_for_feature;
    std::vector<std::string> missing;
    for (const auto& name : bundle.feature_names) {
        const auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end()) {
            missing.push_back(name);
        } else {
            col_for_feature.push_back(it - table.columns.begin());
        }
    }
    std::vector<std::string> extra;
    for (const auto& name : table.columns) {
        if (std::find(bundle.feature_names.begin(), bundle.feature_names.end(), name) ==
            bundle.feature_names.end()) {
            extra.push_back(name);
        }
    }
    if (!missing.empty() || !extra.empty()) {
        std::string msg = input_csv + ": columns do not match the bundle's features;";
        if (!missing.empty()) {
            msg += " missing:";
            for (const auto& m : missing) msg += " '" + m + "'";
            msg += ';';
        }
        if (!extra.empty()) {
            msg += " unexpected:";
            for (const auto& e : extra) msg += " '" + e + "'";
        }
        throw ValidationError(msg);
    }

    Eigen::MatrixXd X(table.cells.rows(), static_cast<Eigen::Index>(col_for_feature.size()));
    for (std::size_t j = 0; j < col_for_feature.size(); ++j) {
        X.col(static_cast<Eigen::Index>(j)) = table.cells.col(col_for_feature[j]);
    }

    const auto preds = predict_combined(bundle.model_a, *bundle.model_b, bundle.alpha_scaler, X);

    std::ofstream out(output_csv);
    if (!out) throw ValidationError("cannot write '" + output_csv + "'");
    for (const auto& name : bundle.feature_names) out << name << ',';
    out << "y_hat,sigma_hat\n";
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) out << format_double(X(i, j)) << ',';
        const auto& p = preds[static_cast<std::size_t>(i)];
        out << format_double(p.value) << ',' << format_double(p.error_bar) << '\n';
    }
}

}  // namespace errbar
