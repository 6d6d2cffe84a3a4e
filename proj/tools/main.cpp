// Command-line front end. One binary, one subcommand per pipeline stage, so a
// full run can be reproduced or debugged piecewise.

#include "errbar/augment.hpp"
#include "errbar/bundle.hpp"
#include "errbar/errors.hpp"
#include "errbar/eval.hpp"
#include "errbar/pipeline.hpp"
#include "errbar/plot.hpp"
#include "errbar/rng.hpp"
#include "errbar/synth.hpp"
#include "errbar/util.hpp"

#include <CLI11.hpp>

#include <bit>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace errbar;
namespace fs = std::filesystem;

struct MlpFlags {
    std::vector<int> hidden{64, 64};
    int epochs = 100;
    double lr = 1e-3;
    int batch = 64;
};

void add_mlp_flags(CLI::App* cmd, MlpFlags& f) {
    cmd->add_option("--hidden", f.hidden, "hidden layer widths (e.g. 64,64 or 2048,2048)")
        ->delimiter(',');
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
    cmd->add_option("--batch", f.batch, "mini-batch size");
}

MLPConfig to_mlp_config(const MlpFlags& f) {
    MLPConfig c;
    c.hidden_widths = f.hidden;
    c.epochs = f.epochs;
    c.learning_rate = f.lr;
    c.batch_size = f.batch;
    return c;
}

struct DataFlags {
    std::string path;
    std::string target;
    std::vector<std::string> features;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
    cmd->add_option("--data", f.path, "input CSV")->required();
    cmd->add_option("--target", f.target, "target column name")->required();
    cmd->add_option("--features", f.features, "feature columns (default: all non-target)")
        ->delimiter(',');
}

Dataset load_for_bundle(const DataFlags& f, const ModelBundle& bundle) {
    Dataset d = load_dataset_csv(f.path, f.target,
                                 f.features.empty() ? bundle.feature_names : f.features);
    if (d.feature_names != bundle.feature_names) {
        throw ValidationError(f.path + ": feature columns do not match the bundle");
    }
    return d;
}

// Beta-style CSV (augment output or any table with a sigma_A-like target):
// bookkeeping columns are dropped from the feature list.
Dataset load_beta_csv(const std::string& path, const std::string& target) {
    const CsvTable table = read_csv_table(path);
    std::vector<std::string> features;
    for (const auto& name : table.columns) {
        if (name == target || name == "origin_row" || name == "is_original") continue;
        features.push_back(name);
    }
    Dataset d = load_dataset_csv(path, target, features);
    d.space = FeatureSpace::scaled;
    validate_dataset(d);
    return d;
}

void print_metrics(const std::string& label, const Metrics& m) {
    std::cout << label << ": sigma=" << format_double(m.sigma) << " mae=" << format_double(m.mae)
              << " r2=" << format_double(m.r2) << " rmse=" << format_double(m.rmse)
              << " nrmse=" << format_double(m.nrmse) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "errbar: train a predictive model, a calibrated bootstrap ensemble for error bars,\n"
        "and a distilled single-model error-bar predictor; evaluate distillation quality\n"
        "and the inference speedup of dropping the ensemble."};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    std::function<void()> run;

    // ---- pipeline ----
    {
        auto* cmd = app.add_subcommand("pipeline", "run every stage end-to-end from a config file");
        auto opt = std::make_shared<std::string>();
        auto out_override = std::make_shared<std::string>();
        auto seed_override = std::make_shared<std::uint64_t>();
        auto threads_override = std::make_shared<int>();
        cmd->add_option("--config", *opt, "JSON run configuration")->required();
        auto* out_opt = cmd->add_option("--out", *out_override, "override config out_dir");
        auto* seed_opt = cmd->add_option("--seed", *seed_override, "override config seed");
        auto* thr_opt = cmd->add_option("--threads", *threads_override, "override config threads");
        cmd->callback([=, &run] {
            run = [=] {
                RunConfig cfg = load_run_config(*opt);
                if (out_opt->count()) cfg.out_dir = *out_override;
                if (seed_opt->count()) cfg.seed = *seed_override;
                if (thr_opt->count()) cfg.threads = *threads_override;
                cmd_pipeline(cfg);
            };
        });
    }

    // ---- synth ----
    {
        auto* cmd = app.add_subcommand("synth", "generate a synthetic regression CSV");
        struct Flags {
            std::string out;
            SyntheticSpec spec;
            std::string function = "friedman";
            std::string noise = "heteroscedastic";
        };
        auto f = std::make_shared<Flags>();
        cmd->add_option("--out", f->out, "output CSV")->required();
        cmd->add_option("--n", f->spec.n_samples, "sample count");
        cmd->add_option("--features", f->spec.n_features, "feature count");
        cmd->add_option("--function", f->function, "linear | friedman | sine-mix");
        cmd->add_option("--noise", f->noise, "homoscedastic | heteroscedastic");
        cmd->add_option("--noise-sigma", f->spec.noise_sigma, "base noise std");
        cmd->add_option("--noise-slope", f->spec.noise_slope, "noise growth along feature 0");
        cmd->add_option("--seed", f->spec.seed, "generator seed");
        cmd->callback([=, &run] {
            run = [=] {
                SyntheticSpec spec = f->spec;
                spec.function_tag = parse_synth_function(f->function);
                spec.noise_kind = parse_noise_kind(f->noise);
                write_dataset_csv(generate_synthetic(spec), f->out);
                std::cout << "wrote " << f->out << " (" << spec.n_samples << " rows)\n";
            };
        });
    }

    // ---- train-a ----
    {
        auto* cmd = app.add_subcommand("train-a", "train the accuracy model, start a new bundle");
        struct Flags {
            DataFlags data;
            MlpFlags mlp;
            std::string bundle;
            std::uint64_t seed = 0;
        };
        auto f = std::make_shared<Flags>();
        add_data_flags(cmd, f->data);
        add_mlp_flags(cmd, f->mlp);
        cmd->add_option("--bundle", f->bundle, "output bundle path")->required();
        cmd->add_option("--seed", f->seed, "root seed");
        cmd->callback([=, &run] {
            run = [=] {
                const Dataset raw =
                    load_dataset_csv(f->data.path, f->data.target, f->data.features);
                const MinMaxScaler scaler = fit_scaler(raw);
                const Dataset scaled = apply_scaler(scaler, raw);
                MLPConfig cfg = to_mlp_config(f->mlp);
                cfg.init_seed = substream_seed(f->seed, {tag::kModelA, 0});
                cfg.shuffle_seed = substream_seed(f->seed, {tag::kModelA, 1});
                auto [model, report] = train_mlp(scaled.features, scaled.targets, cfg);
                ModelBundle b;
                b.alpha_scaler = scaler;
                b.model_a = std::move(model);
                b.feature_names = raw.feature_names;
                b.target_name = raw.target_name;
                b.provenance = nlohmann::json{
                    {"train-a", {{"seed", f->seed}, {"data_hash", to_hex(hash_dataset(raw))}}}};
                save_bundle(b, f->bundle);
                std::cout << "trained accuracy model (final MSE "
                          << format_double(report.final_loss) << "), wrote " << f->bundle << '\n';
            };
        });
    }

    // ---- train-ensemble ----
    {
        auto* cmd = app.add_subcommand("train-ensemble",
                                       "train the bootstrap ensemble (uncalibrated)");
        struct Flags {
            DataFlags data;
            MlpFlags mlp;
            std::string bundle;
            int members = 20;
            double fraction = 1.0;
            std::uint64_t seed = 0;
            int threads = 1;
        };
        auto f = std::make_shared<Flags>();
        add_data_flags(cmd, f->data);
        add_mlp_flags(cmd, f->mlp);
        cmd->add_option("--bundle", f->bundle, "bundle to update")->required();
        cmd->add_option("--members", f->members, "ensemble size");
        cmd->add_option("--bootstrap-fraction", f->fraction, "resample size as a fraction of n");
        cmd->add_option("--seed", f->seed, "root seed");
        cmd->add_option("--threads", f->threads, "member-training threads");
        cmd->callback([=, &run] {
            run = [=] {
                ModelBundle b = load_bundle(f->bundle);
                const Dataset raw = load_for_bundle(f->data, b);
                const Dataset scaled = apply_scaler(b.alpha_scaler, raw);
                b.ensemble = train_ensemble(scaled, f->members, to_mlp_config(f->mlp),
                                            substream_seed(f->seed, {tag::kFinalEnsemble}),
                                            f->threads, f->fraction);
                b.provenance["train-ensemble"] = {{"seed", f->seed}, {"members", f->members}};
                save_bundle(b, f->bundle);
                std::cout << "trained " << f->members << "-member ensemble, wrote " << f->bundle
                          << '\n';
            };
        });
    }

    // ---- calibrate ----
    {
        auto* cmd = app.add_subcommand("calibrate",
                                       "fit the ensemble's error-bar calibration on CV residuals");
        struct Flags {
            DataFlags data;
            std::string bundle;
            int bins = 10;
            int folds = 5;
            std::uint64_t seed = 0;
            int threads = 1;
        };
        auto f = std::make_shared<Flags>();
        add_data_flags(cmd, f->data);
        cmd->add_option("--bundle", f->bundle, "bundle to update")->required();
        cmd->add_option("--bins", f->bins, "calibration bins");
        cmd->add_option("--folds", f->folds, "calibration CV folds");
        cmd->add_option("--seed", f->seed, "root seed");
        cmd->add_option("--threads", f->threads, "member-training threads");
        cmd->callback([=, &run] {
            run = [=] {
                ModelBundle b = load_bundle(f->bundle);
                if (!b.ensemble) {
                    throw ValidationError(f->bundle + ": no ensemble; run train-ensemble first");
                }
                const Dataset raw = load_for_bundle(f->data, b);
                const Dataset scaled = apply_scaler(b.alpha_scaler, raw);
                MLPConfig cfg = b.ensemble->members.front().config;
                b.ensemble->calibration =
                    fit_calibration_cv(scaled, b.ensemble->size(), cfg, f->bins,
                                       substream_seed(f->seed, {tag::kFinalEnsemble}), f->folds,
                                       f->threads);
                b.provenance["calibrate"] = {{"seed", f->seed}, {"bins", f->bins}};
                save_bundle(b, f->bundle);
                const auto& c = b.ensemble->calibration;
                std::cout << "calibration " << c.method_tag << ": a=" << format_double(c.a)
                          << " b=" << format_double(c.b) << ", wrote " << f->bundle << '\n';
            };
        });
    }

    // ---- augment ----
    {
        auto* cmd = app.add_subcommand(
            "augment", "sample synthetic feature points around the data and label them");
        struct Flags {
            DataFlags data;
            std::string bundle;
            std::string out;
            double scale = 0.1;
            Eigen::Index n_total = 0;
            std::uint64_t seed = 0;
            std::string allocation = "round-robin";
        };
        auto f = std::make_shared<Flags>();
        add_data_flags(cmd, f->data);
        cmd->add_option("--bundle", f->bundle, "bundle with a calibrated ensemble")->required();
        cmd->add_option("--out", f->out, "output augmented CSV")->required();
        cmd->add_option("--scale-factor", f->scale, "hypercube half-width in [0, 0.5]");
        cmd->add_option("--n-total", f->n_total, "total rows including the originals")->required();
        cmd->add_option("--seed", f->seed, "generator seed");
        cmd->add_option("--allocation", f->allocation, "round-robin | random seed-point choice");
        cmd->callback([=, &run] {
            run = [=] {
                ModelBundle b = load_bundle(f->bundle);
                if (!b.ensemble || !b.ensemble->calibration.fitted()) {
                    throw ValidationError(f->bundle +
                                          ": needs a calibrated ensemble; run calibrate first");
                }
                const Dataset raw = load_for_bundle(f->data, b);
                const Dataset scaled = apply_scaler(b.alpha_scaler, raw);
                AugmentationConfig acfg;
                acfg.scale_factor = f->scale;
                acfg.n_total = f->n_total;
                acfg.seed = f->seed;
                if (f->allocation == "random") {
                    acfg.allocation = SeedAllocation::random;
                } else if (f->allocation != "round-robin") {
                    throw ValidationError("--allocation must be round-robin or random");
                }
                const AugmentedSet aug = generate_augmented_features(scaled.features, acfg);
                const Eigen::VectorXd sigma = label_error_bars(*b.ensemble, aug.X_beta);
                write_augmented_csv(aug, sigma, b.feature_names, f->out);
                std::cout << "wrote " << f->out << " (" << aug.X_beta.rows() << " rows at s="
                          << format_double(f->scale) << ")\n";
            };
        });
    }

    // ---- distill ----
    {
        auto* cmd = app.add_subcommand("distill",
                                       "train the single error-bar model on an augmented CSV");
        struct Flags {
            std::string aug;
            std::string bundle;
            MlpFlags mlp;
            std::uint64_t seed = 0;
        };
        auto f = std::make_shared<Flags>();
        cmd->add_option("--aug", f->aug, "augmented CSV from the augment stage")->required();
        cmd->add_option("--bundle", f->bundle, "bundle to update")->required();
        add_mlp_flags(cmd, f->mlp);
        cmd->add_option("--seed", f->seed, "root seed");
        cmd->callback([=, &run] {
            run = [=] {
                ModelBundle b = load_bundle(f->bundle);
                Dataset beta = load_dataset_csv(f->aug, "sigma_A", b.feature_names);
                beta.space = FeatureSpace::scaled;
                validate_dataset(beta);
                MLPConfig cfg = to_mlp_config(f->mlp);
                cfg.init_seed = substream_seed(f->seed, {tag::kModelB, 0});
                cfg.shuffle_seed = substream_seed(f->seed, {tag::kModelB, 1});
                b.model_b = train_model_b(beta, cfg);
                b.provenance["distill"] = {{"seed", f->seed}, {"rows", beta.n_rows()}};
                save_bundle(b, f->bundle);
                std::cout << "distilled error-bar model from " << beta.n_rows()
                          << " rows, wrote " << f->bundle << '\n';
            };
        });
    }

    // ---- evaluate ----
    {
        auto* cmd = app.add_subcommand(
            "evaluate", "cross-validate the distilled model on an augmented CSV");
        struct Flags {
            std::string aug;
            std::string target = "sigma_A";
            MlpFlags mlp;
            int cv_k = 5;
            std::uint64_t seed = 0;
        };
        auto f = std::make_shared<Flags>();
        cmd->add_option("--aug", f->aug, "augmented CSV")->required();
        cmd->add_option("--target", f->target, "target column");
        add_mlp_flags(cmd, f->mlp);
        cmd->add_option("--cv-k", f->cv_k, "fold count");
        cmd->add_option("--seed", f->seed, "root seed");
        cmd->callback([=, &run] {
            run = [=] {
                const Dataset beta = load_beta_csv(f->aug, f->target);
                const CvResult cv =
                    cross_validate_model_b(beta, f->cv_k, to_mlp_config(f->mlp), f->seed);
                print_metrics("pooled", cv.pooled);
                for (std::size_t i = 0; i < cv.per_fold.size(); ++i) {
                    print_metrics("fold " + std::to_string(i), cv.per_fold[i]);
                }
            };
        });
    }

    // ---- curve ----
    {
        auto* cmd = app.add_subcommand("curve",
                                       "learning-curve sweep over scale factors and sizes");
        struct Flags {
            DataFlags data;
            std::string bundle;
            std::string out = "out";
            std::string name;
            MlpFlags mlp;
            std::vector<double> scales{0.01, 0.1, 0.3};
            std::vector<Eigen::Index> sizes;
            int cv_k = 5;
            std::uint64_t seed = 0;
            int threads = 1;
            Eigen::Index n_max_report = 0;
        };
        auto f = std::make_shared<Flags>();
        add_data_flags(cmd, f->data);
        cmd->add_option("--bundle", f->bundle, "bundle with a calibrated ensemble")->required();
        cmd->add_option("--out", f->out, "output directory");
        cmd->add_option("--dataset-name", f->name, "label used in the reports");
        add_mlp_flags(cmd, f->mlp);
        cmd->add_option("--scale-factors", f->scales, "scale factors to sweep")->delimiter(',');
        cmd->add_option("--sizes", f->sizes, "augmented sizes to sweep")->delimiter(',');
        cmd->add_option("--cv-k", f->cv_k, "fold count");
        cmd->add_option("--seed", f->seed, "root seed");
        cmd->add_option("--threads", f->threads, "parallel curve cells");
        cmd->add_option("--n-max-report", f->n_max_report,
                        "size reported as the max-points fit (default: largest size)");
        cmd->callback([=, &run] {
            run = [=] {
                ModelBundle b = load_bundle(f->bundle);
                if (!b.ensemble || !b.ensemble->calibration.fitted()) {
                    throw ValidationError(f->bundle +
                                          ": needs a calibrated ensemble; run calibrate first");
                }
                const Dataset raw = load_for_bundle(f->data, b);
                const Dataset scaled = apply_scaler(b.alpha_scaler, raw);
                std::vector<Eigen::Index> sizes = f->sizes;
                if (sizes.empty()) {
                    for (const Eigen::Index n :
                         {scaled.n_rows(), Eigen::Index{1000}, Eigen::Index{3000},
                          Eigen::Index{10000}, Eigen::Index{30000}, Eigen::Index{100000}}) {
                        if (n >= scaled.n_rows() && (sizes.empty() || n > sizes.back())) {
                            sizes.push_back(n);
                        }
                    }
                }
                const auto points = run_learning_curve(
                    scaled.features, *b.ensemble, f->scales, sizes, to_mlp_config(f->mlp),
                    f->seed, f->cv_k, f->threads, /*log_progress=*/true);
                const auto table =
                    stats_table(points, f->n_max_report > 0 ? f->n_max_report : sizes.back());
                fs::create_directories(f->out);
                const std::string name =
                    f->name.empty() ? fs::path(f->data.path).stem().string() : f->name;
                write_learning_curve_csv(points, name,
                                         (fs::path(f->out) / "learning_curve.csv").string());
                write_stats_table_csv(table, name,
                                      (fs::path(f->out) / "stats_table.csv").string());
                emit_curve_plot(points, (fs::path(f->out) / "learning_curve.svg").string());
                std::cout << "wrote learning_curve.csv, stats_table.csv, learning_curve.svg to "
                          << f->out << '\n';
            };
        });
    }

    // ---- bench ----
    {
        auto* cmd = app.add_subcommand(
            "bench", "time ensemble vs distilled error-bar prediction on one batch");
        struct Flags {
            std::string bundle;
            Eigen::Index batch = 1024;
            int repeats = 11;
            std::uint64_t seed = 0;
        };
        auto f = std::make_shared<Flags>();
        cmd->add_option("--bundle", f->bundle, "bundle with ensemble and distilled model")
            ->required();
        cmd->add_option("--batch", f->batch, "rows per timed prediction");
        cmd->add_option("--repeats", f->repeats, "timed repetitions (median reported)");
        cmd->add_option("--seed", f->seed, "batch generator seed");
        cmd->callback([=, &run] {
            run = [=] {
                const ModelBundle b = load_bundle(f->bundle);
                if (!b.ensemble || !b.model_b) {
                    throw ValidationError(f->bundle +
                                          ": bench needs both the ensemble and model_b");
                }
                const Eigen::Index d = b.model_a.input_dim;
                Eigen::MatrixXd batch(f->batch, d);
                const std::uint64_t key = substream_seed(f->seed, {tag::kBenchData});
                for (Eigen::Index i = 0; i < f->batch; ++i) {
                    for (Eigen::Index j = 0; j < d; ++j) {
                        batch(i, j) = counter_uniform(key, static_cast<std::uint64_t>(i),
                                                      static_cast<std::uint64_t>(j));
                    }
                }
                const BenchmarkResult r =
                    benchmark_inference(*b.ensemble, *b.model_b, batch, f->repeats);
                std::cout << "ensemble:  " << format_fixed(r.ensemble_ns_per_row, 1)
                          << " ns/row, " << r.ensemble_param_count << " parameters\n"
                          << "distilled: " << format_fixed(r.distilled_ns_per_row, 1)
                          << " ns/row, " << r.distilled_param_count << " parameters\n"
                          << "speedup:   " << format_fixed(r.speedup, 2) << "x (batch "
                          << r.batch_size << ", median of " << r.repeats << ")\n";
            };
        });
    }

    // ---- predict ----
    {
        auto* cmd = app.add_subcommand(
            "predict", "predict values and error bars using only the two single models");
        struct Flags {
            std::string bundle, input, output;
        };
        auto f = std::make_shared<Flags>();
        cmd->add_option("--bundle", f->bundle, "trained bundle")->required();
        cmd->add_option("--input", f->input, "input CSV with the bundle's feature columns")
            ->required();
        cmd->add_option("--output", f->output, "output CSV")->required();
        cmd->callback([=, &run] {
            run = [=] {
                cmd_predict(f->bundle, f->input, f->output);
                std::cout << "wrote " << f->output << '\n';
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        run();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
