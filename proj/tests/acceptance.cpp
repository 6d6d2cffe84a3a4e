// Acceptance gate for the error-bar distillation toolkit. Each criterion is
// a self-contained check that prints exactly one [PASS]/[FAIL]/[SKIP] line;
// run with a number to execute a single criterion, or with no arguments for
// the full gate. Exit code: number of failed criteria (77 = skipped, when a
// single criterion was requested).

#include "errbar/augment.hpp"
#include "errbar/bundle.hpp"
#include "errbar/distill.hpp"
#include "errbar/ensemble.hpp"
#include "errbar/eval.hpp"
#include "errbar/pipeline.hpp"
#include "errbar/rng.hpp"
#include "errbar/synth.hpp"
#include "errbar/util.hpp"

#include "fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace errbar;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::fail;
    std::string detail;
};

Outcome pass(std::string detail) { return {Status::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Status::fail, std::move(detail)}; }

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "errbar_acceptance" / name;
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// Criterion 1: metric identities against the published statistics table.
// Max-points cells for the three materials datasets; columns are
// scale factor, sigma, mae, r2, nrmse, rmse as reported (two decimals).
// ---------------------------------------------------------------------------

struct ReportedCell {
    const char* dataset;
    double s, sigma, mae, r2, nrmse, rmse;
};

constexpr ReportedCell kReportedMaxCells[] = {
    {"Diffusion", 0.001, 0.03, 0.00, 1.00, 0.01, 0.00},
    {"Diffusion", 0.01, 0.03, 0.00, 1.00, 0.03, 0.00},
    {"Diffusion", 0.1, 0.03, 0.01, 0.92, 0.29, 0.01},
    {"Diffusion", 0.2, 0.03, 0.01, 0.75, 0.50, 0.01},
    {"Diffusion", 0.3, 0.03, 0.01, 0.64, 0.60, 0.02},
    {"Diffusion", 0.4, 0.04, 0.02, 0.61, 0.63, 0.02},
    {"Diffusion", 0.5, 0.04, 0.02, 0.60, 0.64, 0.03},
    {"Perovskite", 0.001, 19.92, 0.06, 1.00, 0.01, 0.24},
    {"Perovskite", 0.01, 19.82, 0.48, 1.00, 0.05, 1.00},
    {"Perovskite", 0.1, 20.18, 4.18, 0.91, 0.30, 6.08},
    {"Perovskite", 0.2, 21.66, 7.99, 0.73, 0.52, 11.31},
    {"Perovskite", 0.3, 25.08, 11.50, 0.61, 0.63, 15.76},
    {"Perovskite", 0.4, 29.20, 14.77, 0.54, 0.68, 19.89},
    {"Perovskite", 0.5, 33.66, 17.74, 0.50, 0.71, 23.80},
    {"Superconductivity", 0.001, 10.80, 0.08, 1.00, 0.02, 0.19},
    {"Superconductivity", 0.01, 10.78, 0.55, 0.99, 0.09, 0.94},
    {"Superconductivity", 0.1, 12.62, 3.67, 0.81, 0.44, 5.50},
    {"Superconductivity", 0.2, 17.51, 6.41, 0.72, 0.53, 9.31},
    {"Superconductivity", 0.3, 22.23, 8.61, 0.69, 0.56, 12.40},
    {"Superconductivity", 0.4, 26.35, 10.61, 0.66, 0.58, 15.28},
    {"Superconductivity", 0.5, 30.10, 12.29, 0.65, 0.59, 17.84},
};

Outcome criterion1() {
    int nrmse_violations = 0;
    int r2_violations = 0;
    int interval_inconsistent = 0;
    std::ostringstream log;

    for (const auto& c : kReportedMaxCells) {
        if (c.sigma == 0.0) continue;  // all published sigmas are nonzero
        const double ratio = c.rmse / c.sigma;
        const double nrmse_dev = std::abs(c.nrmse - ratio);
        const double r2_dev = std::abs(c.r2 - (1.0 - c.nrmse * c.nrmse));
        const bool nrmse_ok = nrmse_dev <= 0.015;
        const bool r2_ok = r2_dev <= 0.02;
        if (!nrmse_ok) ++nrmse_violations;
        if (!r2_ok) ++r2_violations;
        if (!nrmse_ok || !r2_ok) {
            log << "\n    " << c.dataset << " s=" << format_double(c.s)
                << ": |nrmse - rmse/sigma| = " << format_fixed(nrmse_dev, 4)
                << (nrmse_ok ? "" : " > 0.015") << ", |r2 - (1 - nrmse^2)| = "
                << format_fixed(r2_dev, 4) << (r2_ok ? "" : " > 0.02");
        }

        // Informational: is the cell consistent with the identity once the
        // two-decimal rounding of each published value is taken into account?
        const double half = 0.005;
        const double lo = std::max(0.0, c.rmse - half) / (c.sigma + half);
        const double hi = (c.rmse + half) / std::max(1e-12, c.sigma - half);
        const bool interval_ok = hi >= c.nrmse - half && lo <= c.nrmse + half;
        if (!interval_ok) ++interval_inconsistent;
    }

    std::ostringstream summary;
    summary << "21 max-points cells: " << nrmse_violations
            << " nrmse-identity violations at tolerance 0.015, " << r2_violations
            << " r2-identity violations at tolerance 0.02; rounding-interval consistency "
            << (interval_inconsistent == 0 ? "holds for all cells" : "violated") << "."
            << log.str();
    if (nrmse_violations == 0 && r2_violations == 0) return pass(summary.str());
    return fail(summary.str() +
                "\n    note: the flat 0.015 tolerance cannot absorb two-decimal rounding when "
                "sigma is ~0.03, so the Diffusion rows fail arithmetically even though every "
                "cell is identity-consistent within its published rounding.");
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient correctness on 100 random small networks.
// ---------------------------------------------------------------------------

Outcome criterion2() {
    SplitMix64 gen(20240001);
    double worst = 0.0;
    int accepted = 0, resampled = 0;
    while (accepted < 100) {
        MLPConfig cfg;
        cfg.hidden_widths.clear();
        const auto depth = gen.below(4);  // 0..3 hidden layers
        for (std::uint64_t l = 0; l < depth; ++l) {
            cfg.hidden_widths.push_back(static_cast<int>(1 + gen.below(8)));
        }
        cfg.init_seed = gen.next();
        const auto input_dim = static_cast<Eigen::Index>(1 + gen.below(6));
        const auto rows = static_cast<Eigen::Index>(1 + gen.below(8));
        const MLPModel m = init_mlp(input_dim, cfg);
        Eigen::MatrixXd X(rows, input_dim);
        Eigen::VectorXd y(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < input_dim; ++j) X(i, j) = 2.0 * gen.uniform() - 1.0;
            y[i] = 4.0 * gen.uniform() - 2.0;
        }
        // Central differences are one-sided at a ReLU kink; only check
        // configurations whose activation pattern is stable under the step.
        if (errbar::test::min_abs_preactivation(m, X) < 1e-3) {
            ++resampled;
            continue;
        }
        worst = std::max(worst, errbar::test::worst_gradient_deviation(m, X, y));
        ++accepted;
    }
    std::ostringstream s;
    s << "100 random networks (<= 3 hidden layers, <= 8 units): worst relative deviation from "
         "central finite differences = "
      << format_double(worst) << " (tolerance 1e-4; " << resampled
      << " kink-adjacent configurations redrawn)";
    return worst <= 1e-4 ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: bootstrap unique-index fraction.
// ---------------------------------------------------------------------------

Outcome criterion3() {
    double total = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const auto idx = bootstrap_indices(10000, 9000 + static_cast<std::uint64_t>(s));
        const std::set<Eigen::Index> unique(idx.begin(), idx.end());
        total += static_cast<double>(unique.size()) / 10000.0;
    }
    const double mean = total / seeds;
    std::ostringstream s;
    s << "mean unique-index fraction over " << seeds << " seeds at n=10^4: "
      << format_fixed(mean, 4) << " (expected 0.632 +/- 0.02)";
    return std::abs(mean - 0.632) <= 0.02 ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: augmentation invariants at one million samples, s = 0.5.
// ---------------------------------------------------------------------------

Outcome criterion4() {
    std::ostringstream s;
    bool ok = true;

    // Containment over mixed random seed rows.
    {
        SplitMix64 gen(31);
        Eigen::MatrixXd X0(10, 3);
        for (Eigen::Index i = 0; i < X0.size(); ++i) X0(i) = gen.uniform();
        AugmentationConfig cfg;
        cfg.scale_factor = 0.5;
        cfg.n_total = 1000000;
        cfg.seed = 32;
        const AugmentedSet aug = generate_augmented_features(X0, cfg);
        const double lo = aug.X_beta.minCoeff();
        const double hi = aug.X_beta.maxCoeff();
        const bool contained = lo >= 0.0 && hi <= 1.0;
        ok = ok && contained;
        s << "containment over 10^6 rows at s=0.5: [" << format_double(lo) << ", "
          << format_double(hi) << "]" << (contained ? "" : " OUT OF RANGE");
    }

    // Boundary clamp mass from a seed component at exactly 1.0.
    {
        const Eigen::MatrixXd X0 = Eigen::MatrixXd::Ones(1, 1);
        AugmentationConfig cfg;
        cfg.scale_factor = 0.5;
        cfg.n_total = 1000001;
        cfg.seed = 33;
        const AugmentedSet aug = generate_augmented_features(X0, cfg);
        Eigen::Index clamped = 0;
        for (Eigen::Index i = 1; i < aug.X_beta.rows(); ++i) {
            if (aug.X_beta(i, 0) == 1.0) ++clamped;
        }
        const double mass = static_cast<double>(clamped) / 1000000.0;
        const bool mass_ok = std::abs(mass - 0.5) <= 0.02;
        ok = ok && mass_ok;
        s << "; clamp mass at boundary seed 1.0: " << format_fixed(mass, 4)
          << (mass_ok ? "" : " outside 0.5 +/- 0.02");
    }

    // KS uniformity for an interior component (x=0.5, s=0.5 spans (0,1)).
    {
        Eigen::MatrixXd X0(1, 1);
        X0 << 0.5;
        AugmentationConfig cfg;
        cfg.scale_factor = 0.5;
        cfg.n_total = 10001;
        cfg.seed = 34;
        const AugmentedSet aug = generate_augmented_features(X0, cfg);
        std::vector<double> v;
        for (Eigen::Index i = 1; i < aug.X_beta.rows(); ++i) v.push_back(aug.X_beta(i, 0));
        std::sort(v.begin(), v.end());
        double d = 0.0;
        const double n = static_cast<double>(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            d = std::max(d, std::abs(v[i] - static_cast<double>(i) / n));
            d = std::max(d, std::abs(static_cast<double>(i + 1) / n - v[i]));
        }
        const double critical = 1.9495 / std::sqrt(n);  // alpha = 0.001
        const bool ks_ok = d < critical;
        ok = ok && ks_ok;
        s << "; KS statistic over 10^4 interior draws: " << format_double(d) << " (< "
          << format_double(critical) << (ks_ok ? ")" : ") FAILED");
    }

    // Prefix nesting between two sizes at the same seed.
    {
        SplitMix64 gen(35);
        Eigen::MatrixXd X0(5, 2);
        for (Eigen::Index i = 0; i < X0.size(); ++i) X0(i) = gen.uniform();
        AugmentationConfig small;
        small.scale_factor = 0.5;
        small.n_total = 10000;
        small.seed = 36;
        AugmentationConfig large = small;
        large.n_total = 1000000;
        const AugmentedSet a = generate_augmented_features(X0, small);
        const AugmentedSet b = generate_augmented_features(X0, large);
        const bool nested = b.X_beta.topRows(10000) == a.X_beta;
        ok = ok && nested;
        s << "; prefix nesting 10^4 into 10^6: " << (nested ? "exact" : "BROKEN");
    }

    return ok ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: desk-scale learning-curve trends on synthetic data.
// ---------------------------------------------------------------------------

Outcome criterion5() {
    const std::vector<double> scale_factors{0.01, 0.1, 0.3};
    const std::vector<Eigen::Index> sizes{200, 1000, 5000, 20000};
    const int n_seeds = 3;

    MLPConfig net_cfg;  // shared by the accuracy model, members and model B
    net_cfg.hidden_widths = {64, 64};

    std::map<std::pair<double, Eigen::Index>, double> sum_nrmse;
    for (int seed = 0; seed < n_seeds; ++seed) {
        SyntheticSpec spec;
        spec.n_samples = 200;
        spec.n_features = 10;
        spec.function_tag = SynthFunction::linear;
        spec.noise_kind = NoiseKind::heteroscedastic;
        spec.noise_sigma = 0.2;
        spec.noise_slope = 2.0;
        spec.seed = 500 + static_cast<std::uint64_t>(seed);
        const Dataset raw = generate_synthetic(spec);
        const Dataset scaled = apply_scaler(fit_scaler(raw), raw);

        const std::uint64_t run_seed = substream_seed(1000 + static_cast<std::uint64_t>(seed),
                                                      {tag::kFinalEnsemble});
        const EnsembleModel ensemble =
            train_calibrated_ensemble(scaled, 10, net_cfg, 10, run_seed, 5);
        std::cout << "  [c5] seed " << seed << ": ensemble calibrated ("
                  << ensemble.calibration.method_tag
                  << " a=" << format_fixed(ensemble.calibration.a, 3)
                  << " b=" << format_fixed(ensemble.calibration.b, 3) << ")\n"
                  << std::flush;

        const auto points = run_learning_curve(
            scaled.features, ensemble, scale_factors, sizes, net_cfg,
            substream_seed(2000 + static_cast<std::uint64_t>(seed), {tag::kCurve}), 5, 1,
            /*log_progress=*/true);
        for (const auto& p : points) {
            sum_nrmse[{p.scale_factor, p.n_points}] += p.metrics.nrmse;
        }
    }

    std::ostringstream s;
    bool ok = true;
    s << "seed-averaged pooled nrmse:";
    for (const double sf : scale_factors) {
        s << "  s=" << format_double(sf) << ":";
        for (const auto n : sizes) {
            s << ' ' << format_fixed(sum_nrmse[{sf, n}] / n_seeds, 3) << "@" << n;
        }
    }

    // (a) largest size at least matches the smallest augmented size.
    for (const double sf : scale_factors) {
        const double at_max = sum_nrmse[{sf, sizes.back()}] / n_seeds;
        const double at_first_aug = sum_nrmse[{sf, Eigen::Index{1000}}] / n_seeds;
        if (!(at_max <= at_first_aug)) {
            ok = false;
            s << "; (a) VIOLATED at s=" << format_double(sf);
        }
    }
    // (b) final ordering between the smallest and largest scale factors.
    const double final_001 = sum_nrmse[{0.01, sizes.back()}] / n_seeds;
    const double final_03 = sum_nrmse[{0.3, sizes.back()}] / n_seeds;
    if (!(final_001 < final_03)) {
        ok = false;
        s << "; (b) VIOLATED: nrmse(0.01) = " << format_fixed(final_001, 3)
          << " !< nrmse(0.3) = " << format_fixed(final_03, 3);
    }
    // (c) absolute accuracy at the smallest scale factor.
    if (!(final_001 <= 0.15)) {
        ok = false;
        s << "; (c) VIOLATED: nrmse(0.01, 2e4) = " << format_fixed(final_001, 3) << " > 0.15";
    }
    if (ok) {
        s << "; (a) non-increasing to the largest size, (b) nrmse(0.01)="
          << format_fixed(final_001, 3) << " < nrmse(0.3)=" << format_fixed(final_03, 3)
          << ", (c) " << format_fixed(final_001, 3) << " <= 0.15";
    }
    return ok ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: optional reproduction on the public Diffusion dataset.
// ---------------------------------------------------------------------------

Outcome criterion6() {
    const char* csv = std::getenv("ERRBAR_DIFFUSION_CSV");
    const char* target = std::getenv("ERRBAR_DIFFUSION_TARGET");
    if (csv == nullptr || target == nullptr) {
        return {Status::skip,
                "set ERRBAR_DIFFUSION_CSV and ERRBAR_DIFFUSION_TARGET to run the hours-class "
                "dataset reproduction (20 features, hidden 256x256, M=20, s=0.001, n=10^5, "
                "pooled nrmse <= 0.05)"};
    }

    const Dataset raw = load_dataset_csv(csv, target);
    const Dataset scaled = apply_scaler(fit_scaler(raw), raw);
    std::cout << "  [c6] " << raw.n_rows() << " rows, " << raw.n_features()
              << " features from " << csv << "\n";

    MLPConfig cfg;
    cfg.hidden_widths = {256, 256};
    const EnsembleModel ensemble = train_calibrated_ensemble(scaled, 20, cfg, 10, 77001, 5);

    AugmentationConfig acfg;
    acfg.scale_factor = 0.001;
    acfg.n_total = 100000;
    acfg.seed = 77002;
    const AugmentedSet aug = generate_augmented_features(scaled.features, acfg);
    const Dataset beta = build_beta_dataset(aug, ensemble, scaled.feature_names);
    const CvResult cv = cross_validate_model_b(beta, 5, cfg, 77003);

    std::ostringstream s;
    s << "pooled 5-fold nrmse at s=0.001, n=10^5: " << format_fixed(cv.pooled.nrmse, 4)
      << " (required <= 0.05)";
    return cv.pooled.nrmse <= 0.05 ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 7: inference speedup of the distilled path.
// ---------------------------------------------------------------------------

Outcome criterion7() {
    MLPConfig cfg;
    cfg.hidden_widths = {64, 64};
    EnsembleModel e;
    for (int m = 0; m < 20; ++m) {
        MLPConfig member_cfg = cfg;
        member_cfg.init_seed = 600 + static_cast<std::uint64_t>(m);
        e.members.push_back(init_mlp(10, member_cfg));
        e.member_seeds.push_back(member_cfg.init_seed);
    }

    DistilledModel b;
    MLPConfig bcfg = cfg;
    bcfg.init_seed = 699;
    b.net = init_mlp(10, bcfg);
    b.input_scaler.mins = Eigen::VectorXd::Zero(10);
    b.input_scaler.maxs = Eigen::VectorXd::Ones(10);

    Eigen::MatrixXd batch(1024, 10);
    SplitMix64 gen(601);
    for (Eigen::Index i = 0; i < batch.size(); ++i) batch(i) = gen.uniform();

    const BenchmarkResult r = benchmark_inference(e, b, batch, 15);
    std::ostringstream s;
    s << "M=20 equal-architecture benchmark at batch 1024: speedup "
      << format_fixed(r.speedup, 1) << "x (required >= 10), parameter ratio "
      << r.ensemble_param_count / r.distilled_param_count << " (required exactly 20), "
      << format_fixed(r.ensemble_ns_per_row, 0) << " vs "
      << format_fixed(r.distilled_ns_per_row, 0) << " ns/row";
    const bool ok = r.speedup >= 10.0 &&
                    r.ensemble_param_count == 20 * r.distilled_param_count;
    return ok ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-identical reruns of the full pipeline.
// ---------------------------------------------------------------------------

RunConfig small_pipeline_config(const std::string& out_dir) {
    nlohmann::json j = {
        {"seed", 808},
        {"out_dir", out_dir},
        {"dataset",
         {{"synthetic",
           {{"n_samples", 100},
            {"n_features", 6},
            {"function", "linear"},
            {"noise", "heteroscedastic"},
            {"noise_sigma", 0.2},
            {"noise_slope", 1.5},
            {"seed", 81}}}}},
        {"model_a",
         {{"hidden_widths", {16, 16}},
          {"epochs", 40},
          {"batch_size", 16},
          {"learning_rate", 2e-3}}},
        {"ensemble", {{"members", 4}, {"calibration_bins", 5}, {"calibration_folds", 4}}},
        {"augment", {{"scale_factors", {0.05, 0.2}}, {"sizes", {100, 600}}}},
        {"cv_k", 3},
    };
    return parse_run_config(j);
}

Outcome criterion8() {
    const fs::path dir = scratch_dir("determinism");
    const fs::path out = dir / "out";
    fs::remove_all(out);

    const std::vector<std::string> artifacts = {"bundle.json", "learning_curve.csv",
                                                "stats_table.csv", "learning_curve.svg"};
    const RunConfig cfg = small_pipeline_config(out.string());
    cmd_pipeline(cfg);
    std::map<std::string, std::string> first;
    for (const auto& a : artifacts) first[a] = read_file(out / a);

    cmd_pipeline(cfg);  // same config, same out_dir
    std::ostringstream s;
    bool ok = true;
    for (const auto& a : artifacts) {
        const bool same = read_file(out / a) == first[a];
        ok = ok && same;
        if (!same) s << a << " differs between identical runs; ";
    }
    if (ok) {
        s << "two identical runs reproduced bundle.json, learning_curve.csv, stats_table.csv "
             "and learning_curve.svg byte for byte";
    }
    return ok ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 9: calibration recovery oracles over 20 seeds.
// ---------------------------------------------------------------------------

Outcome criterion9() {
    double worst_a1 = 0.0, worst_b1 = 0.0, worst_a2 = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SplitMix64 gen(900 + seed);
        const int n = 4000;
        std::vector<double> spreads(n), matched(n), inflated(n);
        double mean_s = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            spreads[iu] = 0.5 + gen.uniform();
            const double g = gaussian(gen);
            matched[iu] = spreads[iu] * g;
            inflated[iu] = 2.0 * spreads[iu] * g;
            mean_s += spreads[iu];
        }
        mean_s /= n;
        const CalibrationParams p1 = fit_calibration_line(spreads, matched, 10);
        const CalibrationParams p2 = fit_calibration_line(spreads, inflated, 10);
        worst_a1 = std::max(worst_a1, std::abs(p1.a - 1.0));
        worst_b1 = std::max(worst_b1, std::abs(p1.b) / mean_s);
        worst_a2 = std::max(worst_a2, std::abs(p2.a - 2.0));
    }
    std::ostringstream s;
    s << "20 seeds, constructed Gaussian residuals: worst |a-1| = " << format_fixed(worst_a1, 3)
      << " (<= 0.15), worst |b|/mean(s) = " << format_fixed(worst_b1, 3)
      << " (<= 0.15); inflated residuals: worst |a-2| = " << format_fixed(worst_a2, 3)
      << " (<= 0.3)";
    const bool ok = worst_a1 <= 0.15 && worst_b1 <= 0.15 && worst_a2 <= 0.3;
    return ok ? pass(s.str()) : fail(s.str());
}

// ---------------------------------------------------------------------------
// Criterion 10: composition invariants of the deployed predictor.
// ---------------------------------------------------------------------------

Outcome criterion10() {
    const fs::path dir = scratch_dir("composition");
    const fs::path out = dir / "out";
    fs::remove_all(out);
    const RunConfig cfg = small_pipeline_config(out.string());
    const PipelineResult result = cmd_pipeline(cfg);
    const ModelBundle bundle = load_bundle(result.bundle_path);

    // 10^5 random rows across (and slightly beyond) the scaler's fitted box.
    const Eigen::Index n = 100000;
    const Eigen::Index d = bundle.model_a.input_dim;
    Eigen::MatrixXd X(n, d);
    SplitMix64 gen(1001);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double lo = bundle.alpha_scaler.mins[j];
            const double hi = bundle.alpha_scaler.maxs[j];
            const double pad = 0.1 * (hi - lo);
            X(i, j) = (lo - pad) + (hi - lo + 2 * pad) * gen.uniform();
        }
    }

    const fs::path input_csv = dir / "inputs.csv";
    {
        std::ofstream f(input_csv);
        for (std::size_t j = 0; j < bundle.feature_names.size(); ++j) {
            f << bundle.feature_names[j]
              << (j + 1 == bundle.feature_names.size() ? "\n" : ",");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                f << format_double(X(i, j)) << (j + 1 == d ? "\n" : ",");
            }
        }
    }
    const fs::path output_csv = dir / "preds.csv";
    cmd_predict(result.bundle_path, input_csv.string(), output_csv.string());

    const CsvTable outputs = read_csv_table(output_csv.string());
    const Eigen::VectorXd direct =
        mlp_forward(bundle.model_a, bundle.alpha_scaler.transform(X));

    Eigen::Index value_mismatches = 0, floor_violations = 0;
    const Eigen::Index y_col = d, sigma_col = d + 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (outputs.cells(i, y_col) != direct[i]) ++value_mismatches;
        if (outputs.cells(i, sigma_col) < bundle.model_b->sigma_floor) ++floor_violations;
    }
    std::ostringstream s;
    s << "10^5 random inputs through predict: " << value_mismatches
      << " y_hat values differ from the accuracy model alone (required 0), " << floor_violations
      << " sigma_hat below sigma_floor (required 0)";
    return (value_mismatches == 0 && floor_violations == 0) ? pass(s.str()) : fail(s.str());
}

struct Criterion {
    int number;
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "metric identities vs the published statistics table", criterion1},
    {2, "gradient correctness against finite differences", criterion2},
    {3, "bootstrap unique-index fraction", criterion3},
    {4, "augmentation invariants at 10^6 samples", criterion4},
    {5, "desk-scale learning-curve trends", criterion5},
    {6, "optional Diffusion dataset reproduction", criterion6},
    {7, "ensemble-vs-distilled inference speedup", criterion7},
    {8, "byte-identical pipeline reruns", criterion8},
    {9, "calibration recovery oracles", criterion9},
    {10, "composition invariants of the deployed predictor", criterion10},
};

int run_one(const Criterion& c) {
    Outcome outcome;
    try {
        outcome = c.run();
    } catch (const std::exception& e) {
        outcome = fail(std::string("unexpected exception: ") + e.what());
    }
    const char* label = outcome.status == Status::pass   ? "[PASS]"
                        : outcome.status == Status::skip ? "[SKIP]"
                                                         : "[FAIL]";
    std::cout << label << " criterion " << c.number << ": " << c.name << " -- "
              << outcome.detail << "\n"
              << std::flush;
    if (outcome.status == Status::fail) return 1;
    if (outcome.status == Status::skip) return 77;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        const int wanted = std::atoi(argv[1]);
        for (const auto& c : kCriteria) {
            if (c.number == wanted) return run_one(c);
        }
        std::cerr << "no criterion " << argv[1] << "\n";
        return 2;
    }

    int failures = 0;
    for (const auto& c : kCriteria) {
        if (run_one(c) == 1) ++failures;
    }
    std::cout << (failures == 0 ? "acceptance gate: all criteria passed\n"
                                : "acceptance gate: " + std::to_string(failures) +
                                      " criterion(s) failed\n");
    return failures;
}
