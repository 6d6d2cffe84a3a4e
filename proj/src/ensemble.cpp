#include "errbar/ensemble.hpp"

#include "errbar/errors.hpp"
#include "errbar/rng.hpp"
#include "errbar/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace errbar {
namespace {

void check_scaled(const Dataset& d, const char* who) {
    if (d.space != FeatureSpace::scaled) {
        throw ValidationError(std::string(who) + " expects features in scaled space");
    }
    if (d.n_rows() < 1) {
        throw ValidationError(std::string(who) + ": empty dataset");
    }
}

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::int64_t EnsembleModel::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& m : members) n += m.parameter_count();
    return n;
}

std::vector<Eigen::Index> bootstrap_indices(Eigen::Index n, std::uint64_t seed) {
    return bootstrap_indices(n, n, seed);
}

std::vector<Eigen::Index> bootstrap_indices(Eigen::Index n, Eigen::Index count,
                                            std::uint64_t seed) {
    if (n < 1) throw ValidationError("bootstrap_indices: n must be >= 1");
    if (count < 1) throw ValidationError("bootstrap_indices: count must be >= 1");
    SplitMix64 gen(substream_seed(seed, {tag::kBootstrap}));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
    for (auto& i : idx) {
        i = static_cast<Eigen::Index>(gen.below(static_cast<std::uint64_t>(n)));
    }
    return idx;
}

EnsembleModel train_ensemble(const Dataset& scaled, int members, const MLPConfig& config,
                             std::uint64_t seed, int threads, double bootstrap_fraction) {
    check_scaled(scaled, "train_ensemble");
    if (members < 2) {
        throw ValidationError("ensemble needs >= 2 members, got " + std::to_string(members));
    }
    if (!(bootstrap_fraction > 0.0 && bootstrap_fraction <= 1.0)) {
        throw ValidationError("bootstrap_fraction must lie in (0, 1]");
    }

    const Eigen::Index n = scaled.n_rows();
    const auto resample = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(bootstrap_fraction * static_cast<double>(n))));

    EnsembleModel e;
    e.members.resize(static_cast<std::size_t>(members));
    e.member_seeds.resize(static_cast<std::size_t>(members));
    for (int m = 0; m < members; ++m) {
        e.member_seeds[static_cast<std::size_t>(m)] =
            substream_seed(seed, {tag::kMember, static_cast<std::uint64_t>(m)});
    }

    parallel_for(static_cast<std::size_t>(members), threads, [&](std::size_t m) {
        const std::uint64_t ms = e.member_seeds[m];
        try {
            const auto idx = bootstrap_indices(n, resample, substream_seed(ms, {tag::kBootstrap}));
            MLPConfig member_cfg = config;
            member_cfg.init_seed = substream_seed(ms, {tag::kWeightInit});
            member_cfg.shuffle_seed = substream_seed(ms, {tag::kShuffle});
            auto [model, report] =
                train_mlp(gather_rows(scaled.features, idx), gather_rows(scaled.targets, idx),
                          member_cfg);
            e.members[m] = std::move(model);
        } catch (const std::exception& ex) {
            throw TrainingError("ensemble member " + std::to_string(m) + ": " + ex.what());
        }
    });

    return e;  // calibration stays the identity until fitted
}

std::vector<UncertainPrediction> ensemble_predict(const EnsembleModel& e,
                                                  const Eigen::MatrixXd& X) {
    if (e.size() < 2) throw ValidationError("ensemble has fewer than 2 members");
    const Eigen::Index n = X.rows();
    const auto m_count = static_cast<Eigen::Index>(e.size());

    Eigen::MatrixXd preds(n, m_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
        preds.col(m) = mlp_forward(e.members[static_cast<std::size_t>(m)], X);
    }

    const Eigen::VectorXd means = preds.rowwise().mean();
    std::vector<UncertainPrediction> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double var =
            (preds.row(i).array() - means[i]).square().sum() / static_cast<double>(m_count - 1);
        UncertainPrediction& p = out[static_cast<std::size_t>(i)];
        p.mean = means[i];
        p.sigma_raw = std::sqrt(var);
        p.sigma_cal = e.calibration.apply(p.sigma_raw);
    }
    return out;
}

CalibrationParams fit_calibration_line(const std::vector<double>& spreads,
                                       const std::vector<double>& residuals, int n_bins) {
    if (n_bins < 1) throw ValidationError("calibration needs n_bins >= 1");
    if (spreads.size() != residuals.size()) {
        throw ValidationError("calibration: spread/residual length mismatch");
    }
    const auto n = spreads.size();
    if (n < 2 * static_cast<std::size_t>(n_bins)) {
        throw ValidationError("calibration needs at least 2*n_bins rows, got " +
                              std::to_string(n));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spreads[a] < spreads[b]; });

    // Equal-count bins over sorted spread; per bin, pair the mean spread with
    // the RMS residual.
    std::vector<double> bin_s(static_cast<std::size_t>(n_bins));
    std::vector<double> bin_r(static_cast<std::size_t>(n_bins));
    for (int b = 0; b < n_bins; ++b) {
        const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(n_bins);
        const std::size_t hi =
            n * (static_cast<std::size_t>(b) + 1) / static_cast<std::size_t>(n_bins);
        double s_sum = 0.0, r_sq = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            s_sum += spreads[order[i]];
            r_sq += residuals[order[i]] * residuals[order[i]];
        }
        const auto count = static_cast<double>(hi - lo);
        bin_s[static_cast<std::size_t>(b)] = s_sum / count;
        bin_r[static_cast<std::size_t>(b)] = std::sqrt(r_sq / count);
    }

    CalibrationParams params;
    params.n_bins = n_bins;

    const auto [s_min, s_max] = std::minmax_element(bin_s.begin(), bin_s.end());
    if (*s_min == *s_max) {
        // No spread variation across bins: a line is unidentifiable.
        const double mean_s = mean(spreads);
        if (mean_s > 0.0) {
            params.a = rms(residuals) / mean_s;
            params.b = 0.0;
            params.method_tag = "ratio-fallback";
        } else {
            params.a = 1.0;
            params.b = rms(residuals);
            params.method_tag = "constant-fallback";
        }
        return params;
    }

    const double sx = mean(bin_s);
    const double sy = mean(bin_r);
    double cov = 0.0, var = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        const auto bu = static_cast<std::size_t>(b);
        cov += (bin_s[bu] - sx) * (bin_r[bu] - sy);
        var += (bin_s[bu] - sx) * (bin_s[bu] - sx);
    }
    params.a = cov / var;
    params.b = sy - params.a * sx;
    params.method_tag = "binned-linear";
    return params;
}

CalibrationParams fit_calibration(const EnsembleModel& e, const Eigen::MatrixXd& X_cal,
                                  const Eigen::VectorXd& y_cal, int n_bins) {
    if (X_cal.rows() != y_cal.size()) {
        throw ValidationError("calibration: feature rows and target length differ");
    }
    const auto preds = ensemble_predict(e, X_cal);
    std::vector<double> spreads(preds.size());
    std::vector<double> residuals(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        spreads[i] = preds[i].sigma_raw;
        residuals[i] = preds[i].mean - y_cal[static_cast<Eigen::Index>(i)];
    }
    return fit_calibration_line(spreads, residuals, n_bins);
}

CalibrationParams fit_calibration_cv(const Dataset& scaled, int members,
                                     const MLPConfig& config, int n_bins, std::uint64_t seed,
                                     int cv_folds, int threads, double bootstrap_fraction) {
    check_scaled(scaled, "fit_calibration_cv");
    const Eigen::Index n = scaled.n_rows();
    if (n < 2 * static_cast<Eigen::Index>(n_bins)) {
        throw ValidationError("calibration needs at least 2*n_bins rows, got " +
                              std::to_string(n));
    }

    // Every row contributes exactly one held-out (spread, residual) pair.
    const FoldAssignment folds =
        kfold_split(n, cv_folds, substream_seed(seed, {tag::kFoldSplit}));
    std::vector<double> spreads(static_cast<std::size_t>(n));
    std::vector<double> residuals(static_cast<std::size_t>(n));
    for (int f = 0; f < cv_folds; ++f) {
        const auto train_rows = folds.rows_not_in_fold(f);
        const auto test_rows = folds.rows_in_fold(f);
        EnsembleModel fold_e = train_ensemble(
            dataset_rows(scaled, train_rows), members, config,
            substream_seed(seed, {tag::kCalibrationFold, static_cast<std::uint64_t>(f)}),
            threads, bootstrap_fraction);
        const auto preds = ensemble_predict(fold_e, gather_rows(scaled.features, test_rows));
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            const auto row = static_cast<std::size_t>(test_rows[i]);
            spreads[row] = preds[i].sigma_raw;
            residuals[row] = preds[i].mean - scaled.targets[test_rows[i]];
        }
    }
    return fit_calibration_line(spreads, residuals, n_bins);
}

EnsembleModel train_calibrated_ensemble(const Dataset& scaled, int members,
                                        const MLPConfig& config, int n_bins,
                                        std::uint64_t seed, int cv_folds, int threads,
                                        double bootstrap_fraction) {
    const CalibrationParams params = fit_calibration_cv(scaled, members, config, n_bins, seed,
                                                        cv_folds, threads, bootstrap_fraction);
    EnsembleModel final_e =
        train_ensemble(scaled, members, config, substream_seed(seed, {tag::kFinalEnsemble}),
                       threads, bootstrap_fraction);
    final_e.calibration = params;
    return final_e;
}

Eigen::VectorXd label_error_bars(const EnsembleModel& e, const Eigen::MatrixXd& X) {
    if (!e.calibration.fitted()) {
        throw ValidationError("ensemble calibration has not been fitted");
    }
    const auto preds = ensemble_predict(e, X);
    Eigen::VectorXd out(static_cast<Eigen::Index>(preds.size()));
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = preds[i].sigma_cal;
    }
    return out;
}

}  // namespace errbar
