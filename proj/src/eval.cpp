#include "errbar/eval.hpp"

#include "errbar/errors.hpp"
#include "errbar/rng.hpp"
#include "errbar/util.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>

namespace errbar {
namespace {

// Keeps timed prediction results alive past the optimizer.
void do_not_optimize(const void* p) {
    asm volatile("" : : "g"(p) : "memory");
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

std::uint64_t scale_bits(double s) { return std::bit_cast<std::uint64_t>(s); }

}  // namespace

Metrics compute_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw ValidationError("compute_metrics: length mismatch");
    }
    const Eigen::Index n = y_true.size();
    if (n < 1) throw ValidationError("compute_metrics: empty input");

    const Eigen::ArrayXd err = (y_pred - y_true).array();
    const double n_d = static_cast<double>(n);
    const double sse = err.square().sum();

    Metrics m;
    m.rmse = std::sqrt(sse / n_d);
    m.mae = err.abs().sum() / n_d;
    const double mean_t = y_true.mean();
    const double sst = (y_true.array() - mean_t).square().sum();
    m.sigma = std::sqrt(sst / n_d);

    if (m.sigma > 0.0) {
        m.nrmse = m.rmse / m.sigma;
        m.r2 = 1.0 - sse / sst;
    } else {
        m.nrmse = std::numeric_limits<double>::infinity();
        m.r2 = sse > 0.0 ? -std::numeric_limits<double>::infinity() : 1.0;
    }

    // Power-mean inequality; a violation means the arithmetic above broke.
    if (m.mae > m.rmse * (1.0 + 1e-12) + 1e-15) {
        throw std::logic_error("compute_metrics: mae exceeded rmse");
    }
    return m;
}

CvResult cross_validate_model_b(const Dataset& beta, int k, const MLPConfig& config,
                                std::uint64_t seed) {
    const Eigen::Index n = beta.n_rows();
    if (n < k) {
        throw ValidationError("cross-validation needs at least k rows");
    }
    const FoldAssignment folds = kfold_split(n, k, substream_seed(seed, {tag::kFoldSplit}));

    Eigen::VectorXd pooled(n);
    CvResult result;
    result.per_fold.reserve(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        const auto train_rows = folds.rows_not_in_fold(f);
        const auto test_rows = folds.rows_in_fold(f);
        MLPConfig fold_cfg = config;
        fold_cfg.init_seed =
            substream_seed(seed, {tag::kCvFold, static_cast<std::uint64_t>(f), 0});
        fold_cfg.shuffle_seed =
            substream_seed(seed, {tag::kCvFold, static_cast<std::uint64_t>(f), 1});
        DistilledModel b;
        try {
            b = train_model_b(dataset_rows(beta, train_rows), fold_cfg);
        } catch (const std::exception& ex) {
            throw TrainingError("fold " + std::to_string(f) + ": " + ex.what());
        }
        const Eigen::VectorXd preds =
            predict_error_bar(b, gather_rows(beta.features, test_rows));
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            pooled[test_rows[i]] = preds[static_cast<Eigen::Index>(i)];
        }
        result.per_fold.push_back(
            compute_metrics(gather_rows(beta.targets, test_rows), preds));
    }
    result.pooled = compute_metrics(beta.targets, pooled);
    return result;
}

std::vector<LearningCurvePoint> run_learning_curve(
    const Eigen::MatrixXd& beta0, const EnsembleModel& e,
    const std::vector<double>& scale_factors, const std::vector<Eigen::Index>& sizes,
    const MLPConfig& config, std::uint64_t seed, int cv_k, int threads, bool log_progress) {
    if (scale_factors.empty() || sizes.empty()) {
        throw ValidationError("learning curve needs at least one scale factor and one size");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < beta0.rows()) {
            throw ValidationError("size " + std::to_string(sizes[i]) +
                                  " is smaller than the original " +
                                  std::to_string(beta0.rows()) + " rows");
        }
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            throw ValidationError("sizes must be strictly ascending");
        }
    }

    // One nested augmentation per scale factor: every smaller size is a
    // prefix of the largest, so curve points differ by sample count alone.
    struct Cell {
        std::size_t scale_index;
        Eigen::Index n;
    };
    std::vector<Eigen::MatrixXd> features(scale_factors.size());
    std::vector<Eigen::VectorXd> labels(scale_factors.size());
    std::vector<Cell> cells;
    for (std::size_t si = 0; si < scale_factors.size(); ++si) {
        AugmentationConfig acfg;
        acfg.scale_factor = scale_factors[si];
        acfg.n_total = sizes.back();
        acfg.seed = substream_seed(seed, {tag::kAugment, scale_bits(scale_factors[si])});
        const AugmentedSet aug = generate_augmented_features(beta0, acfg);
        features[si] = aug.X_beta;
        labels[si] = label_error_bars(e, aug.X_beta);
        for (const Eigen::Index n : sizes) cells.push_back({si, n});
    }

    std::vector<LearningCurvePoint> points(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t c) {
        const auto [si, n] = cells[c];
        Dataset beta;
        beta.features = features[si].topRows(n);
        beta.targets = labels[si].head(n);
        for (Eigen::Index j = 0; j < beta.features.cols(); ++j) {
            beta.feature_names.push_back("f" + std::to_string(j));
        }
        beta.target_name = "sigma_A";
        beta.space = FeatureSpace::scaled;

        const std::uint64_t cell_seed = substream_seed(
            seed, {tag::kCurveCell, scale_bits(scale_factors[si]),
                   static_cast<std::uint64_t>(n)});
        const auto start = std::chrono::steady_clock::now();
        const CvResult cv = cross_validate_model_b(beta, cv_k, config, cell_seed);
        points[c] = {scale_factors[si], n, cv.pooled, cv.per_fold};
        if (log_progress) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cout << "[curve] s=" << format_double(scale_factors[si]) << " n=" << n
                      << " nrmse=" << format_fixed(cv.pooled.nrmse, 4) << " ("
                      << format_fixed(secs, 1) << "s)\n";
        }
    });
    return points;
}

std::vector<StatsTableRow> stats_table(const std::vector<LearningCurvePoint>& points,
                                       Eigen::Index n_max_report) {
    if (points.empty()) throw ValidationError("stats_table: no points");

    std::vector<double> order;  // scale factors in first-seen order
    std::map<double, std::vector<const LearningCurvePoint*>> by_scale;
    for (const auto& p : points) {
        auto& bucket = by_scale[p.scale_factor];
        if (bucket.empty()) order.push_back(p.scale_factor);
        bucket.push_back(&p);
    }

    std::vector<StatsTableRow> rows;
    for (const double s : order) {
        auto bucket = by_scale[s];
        std::sort(bucket.begin(), bucket.end(),
                  [](const auto* a, const auto* b) { return a->n_points < b->n_points; });

        StatsTableRow row;
        row.scale_factor = s;
        row.at_original = bucket.front()->metrics;

        const LearningCurvePoint* at_max = nullptr;
        for (const auto* p : bucket) {
            if (p->n_points == n_max_report) at_max = p;
        }
        if (at_max == nullptr) {
            throw ValidationError("stats_table: no point at n=" + std::to_string(n_max_report) +
                                  " for scale factor " + format_double(s));
        }
        row.at_max = at_max->metrics;

        // Minimum nrmse; ties go to the larger size so an equally good
        // max-size fit is never flagged.
        const LearningCurvePoint* best = bucket.front();
        for (const auto* p : bucket) {
            if (p->metrics.nrmse <= best->metrics.nrmse) best = p;
        }
        row.best = best->metrics;
        row.max_is_best = !(best->metrics.nrmse < at_max->metrics.nrmse);
        rows.push_back(row);
    }
    return rows;
}

BenchmarkResult benchmark_inference(const EnsembleModel& e, const DistilledModel& b,
                                    const Eigen::MatrixXd& batch, int repeats) {
    if (repeats < 3) throw ValidationError("benchmark needs repeats >= 3");
    if (batch.rows() < 1) throw ValidationError("benchmark needs a non-empty batch");

    using clock = std::chrono::steady_clock;
    const auto rows = static_cast<double>(batch.rows());

    // Warm-up: touch caches and page in both paths once.
    {
        const auto warm_e = ensemble_predict(e, batch);
        do_not_optimize(warm_e.data());
        const Eigen::VectorXd warm_b = predict_error_bar(b, batch);
        do_not_optimize(warm_b.data());
    }

    std::vector<double> ens_ns, dist_ns;
    ens_ns.reserve(static_cast<std::size_t>(repeats));
    dist_ns.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = clock::now();
        const auto preds = ensemble_predict(e, batch);
        const auto t1 = clock::now();
        do_not_optimize(preds.data());
        ens_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = clock::now();
        const Eigen::VectorXd bars = predict_error_bar(b, batch);
        const auto t1 = clock::now();
        do_not_optimize(bars.data());
        dist_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }

    BenchmarkResult r;
    r.ensemble_ns_per_row = median_of(ens_ns) / rows;
    r.distilled_ns_per_row = median_of(dist_ns) / rows;
    r.speedup = r.ensemble_ns_per_row / r.distilled_ns_per_row;
    r.ensemble_param_count = e.parameter_count();
    r.distilled_param_count = b.net.parameter_count();
    r.batch_size = batch.rows();
    r.repeats = repeats;
    return r;
}

void write_learning_curve_csv(const std::vector<LearningCurvePoint>& points,
                              const std::string& dataset_name, const std::string& path) {
    if (points.empty()) throw ValidationError("no learning-curve points to write");
    std::size_t k = 0;
    for (const auto& p : points) k = std::max(k, p.per_fold.size());

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << "dataset_name,scale_factor,n_points,sigma,mae,r2,rmse,nrmse";
    for (std::size_t f = 0; f < k; ++f) out << ",fold_" << f << "_nrmse";
    out << '\n';
    for (const auto& p : points) {
        out << dataset_name << ',' << format_double(p.scale_factor) << ',' << p.n_points << ','
            << format_double(p.metrics.sigma) << ',' << format_double(p.metrics.mae) << ','
            << format_double(p.metrics.r2) << ',' << format_double(p.metrics.rmse) << ','
            << format_double(p.metrics.nrmse);
        for (std::size_t f = 0; f < k; ++f) {
            out << ',';
            if (f < p.per_fold.size()) out << format_double(p.per_fold[f].nrmse);
        }
        out << '\n';
    }
}

void write_stats_table_csv(const std::vector<StatsTableRow>& rows,
                           const std::string& dataset_name, const std::string& path) {
    if (rows.empty()) throw ValidationError("no stats rows to write");
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");

    const auto cell = [](double orig, double max, double best) {
        return format_double(orig) + '/' + format_double(max) + '/' + format_double(best);
    };
    out << "dataset,scale_factor,sigma,mae,r2,nrmse,rmse,flag\n";
    for (const auto& r : rows) {
        out << dataset_name << ',' << format_double(r.scale_factor) << ','
            << cell(r.at_original.sigma, r.at_max.sigma, r.best.sigma) << ','
            << cell(r.at_original.mae, r.at_max.mae, r.best.mae) << ','
            << cell(r.at_original.r2, r.at_max.r2, r.best.r2) << ','
            << cell(r.at_original.nrmse, r.at_max.nrmse, r.best.nrmse) << ','
            << cell(r.at_original.rmse, r.at_max.rmse, r.best.rmse) << ','
            << (r.max_is_best ? "" : "*") << '\n';
    }
}

}  // namespace errbar
