#pragma once

#include "errbar/data.hpp"
#include "errbar/nn.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

// Bootstrap ensemble with calibrated error bars. Members are trained on
// same-size resamples of the data; the spread of their predictions, mapped
// through an affine calibration fitted on held-out residuals, is the
// one-standard-deviation error bar sigma_A.

namespace errbar {

inline constexpr double kSigmaFloor = 1e-8;

struct CalibrationParams {
    double a = 1.0;
    double b = 0.0;
    double sigma_floor = kSigmaFloor;
    // "identity" until fitted; then "binned-linear", or "ratio-fallback" /
    // "constant-fallback" when the bin points were degenerate.
    std::string method_tag = "identity";
    int n_bins = 0;

    bool fitted() const { return method_tag != "identity"; }
    double apply(double sigma_raw) const {
        return std::max(sigma_floor, a * sigma_raw + b);
    }
};

struct UncertainPrediction {
    double mean = 0.0;
    double sigma_raw = 0.0;  // sample std (divisor M-1) across members
    double sigma_cal = 0.0;  // max(sigma_floor, a*sigma_raw + b)
};

struct EnsembleModel {
    std::vector<MLPModel> members;
    CalibrationParams calibration;
    std::vector<std::uint64_t> member_seeds;

    int size() const { return static_cast<int>(members.size()); }
    Eigen::Index input_dim() const { return members.empty() ? 0 : members.front().input_dim; }
    std::int64_t parameter_count() const;
};

// n draws uniformly with replacement from [0, n).
std::vector<Eigen::Index> bootstrap_indices(Eigen::Index n, std::uint64_t seed);
// Resample-size variant (count = round(fraction * n) at the call site).
std::vector<Eigen::Index> bootstrap_indices(Eigen::Index n, Eigen::Index count, std::uint64_t seed);

// Train `members` networks on independent bootstrap resamples. Each member
// owns its own seed substream, so the result is identical for any thread
// count. Returned calibration is the identity (a=1, b=0, unfitted).
EnsembleModel train_ensemble(const Dataset& scaled, int members, const MLPConfig& config,
                             std::uint64_t seed, int threads = 1,
                             double bootstrap_fraction = 1.0);

std::vector<UncertainPrediction> ensemble_predict(const EnsembleModel& e,
                                                  const Eigen::MatrixXd& X);

// Core of the calibration: sort held-out (spread, residual) pairs by spread,
// cut into n_bins equal-count bins, take (mean spread, RMS residual) per bin,
// then least-squares a line through the bin points. Degenerate bins fall back
// to a ratio fit (a = RMS(r)/mean(s)) or a constant fit (a=1, b=RMS(r)).
CalibrationParams fit_calibration_line(const std::vector<double>& spreads,
                                       const std::vector<double>& residuals, int n_bins);

// Held-out data route: predict with the ensemble, pair spreads with
// residuals, fit the line.
CalibrationParams fit_calibration(const EnsembleModel& e, const Eigen::MatrixXd& X_cal,
                                  const Eigen::VectorXd& y_cal, int n_bins);

// Out-of-sample route: a dedicated k-fold pass trains per-fold ensembles and
// pools every row's held-out (spread, residual) pair before fitting.
CalibrationParams fit_calibration_cv(const Dataset& scaled, int members,
                                     const MLPConfig& config, int n_bins, std::uint64_t seed,
                                     int cv_folds = 5, int threads = 1,
                                     double bootstrap_fraction = 1.0);

// Full recipe: a dedicated k-fold pass over the data trains per-fold
// ensembles and pools their out-of-fold (spread, residual) pairs; the line
// fitted to that pool is attached to a final ensemble trained on all rows.
EnsembleModel train_calibrated_ensemble(const Dataset& scaled, int members,
                                        const MLPConfig& config, int n_bins,
                                        std::uint64_t seed, int cv_folds = 5,
                                        int threads = 1, double bootstrap_fraction = 1.0);

// Calibrated error bars per row; requires a fitted calibration. This vector
// is the training target of the distilled model.
Eigen::VectorXd label_error_bars(const EnsembleModel& e, const Eigen::MatrixXd& X);

}  // namespace errbar
