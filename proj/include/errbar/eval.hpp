#pragma once

#include "errbar/augment.hpp"
#include "errbar/data.hpp"
#include "errbar/distill.hpp"
#include "errbar/ensemble.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Metrics, k-fold cross-validation of the distilled model, learning-curve
// sweeps, the three-column statistics table, and the ensemble-vs-distilled
// inference benchmark.

namespace errbar {

// sigma is the population (divisor n) standard deviation of y_true: that is
// the convention under which r2 == 1 - nrmse^2 holds exactly. When sigma is
// zero, nrmse is +inf (and r2 -inf unless the fit is exact).
struct Metrics {
    double sigma = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    double rmse = 0.0;
    double nrmse = 0.0;
};

Metrics compute_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

struct CvResult {
    Metrics pooled;  // over all out-of-fold predictions, sigma from pooled truth
    std::vector<Metrics> per_fold;
};

// Train the distilled model on k-1 folds (scaler refit on the training
// portion only), predict the held-out fold, pool.
CvResult cross_validate_model_b(const Dataset& beta, int k, const MLPConfig& config,
                                std::uint64_t seed);

struct LearningCurvePoint {
    double scale_factor = 0.0;
    Eigen::Index n_points = 0;
    Metrics metrics;
    std::vector<Metrics> per_fold;
};

// For each scale factor: generate one augmentation at the largest size, label
// it with the ensemble, then cross-validate the distilled model on each
// prefix size. Prefix reuse makes the sets nested, so curve points differ by
// sample size alone.
std::vector<LearningCurvePoint> run_learning_curve(
    const Eigen::MatrixXd& beta0, const EnsembleModel& e,
    const std::vector<double>& scale_factors, const std::vector<Eigen::Index>& sizes,
    const MLPConfig& config, std::uint64_t seed, int cv_k = 5, int threads = 1,
    bool log_progress = false);

struct StatsTableRow {
    double scale_factor = 0.0;
    Metrics at_original;  // smallest size (the unaugmented point)
    Metrics at_max;       // size n_max_report
    Metrics best;         // minimum nrmse over all sizes
    bool max_is_best = true;
};

std::vector<StatsTableRow> stats_table(const std::vector<LearningCurvePoint>& points,
                                       Eigen::Index n_max_report);

struct BenchmarkResult {
    double ensemble_ns_per_row = 0.0;
    double distilled_ns_per_row = 0.0;
    double speedup = 0.0;
    std::int64_t ensemble_param_count = 0;
    std::int64_t distilled_param_count = 0;
    Eigen::Index batch_size = 0;
    int repeats = 0;
};

// Median-of-repeats wall time for one full-batch error-bar prediction through
// each path, single-threaded, monotonic clock, one warmup pass per path.
BenchmarkResult benchmark_inference(const EnsembleModel& e, const DistilledModel& b,
                                    const Eigen::MatrixXd& batch, int repeats);

void write_learning_curve_csv(const std::vector<LearningCurvePoint>& points,
                              const std::string& dataset_name, const std::string& path);
void write_stats_table_csv(const std::vector<StatsTableRow>& rows,
                           const std::string& dataset_name, const std::string& path);

}  // namespace errbar
