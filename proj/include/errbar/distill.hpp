#pragma once

#include "errbar/data.hpp"
#include "errbar/ensemble.hpp"
#include "errbar/nn.hpp"

#include <vector>

// The distilled error-bar model: a single network fit on (augmented features,
// ensemble error bars) that replaces the whole ensemble at inference time.

namespace errbar {

struct DistilledModel {
    MLPModel net;
    MinMaxScaler input_scaler;  // refit on the training features
    double sigma_floor = kSigmaFloor;
};

struct CombinedPrediction {
    double value = 0.0;      // accuracy model output, target units
    double error_bar = 0.0;  // distilled sigma estimate, >= sigma_floor
};

// Refit a min-max scaler on the features, train one network on (scaled
// features, raw targets). Targets must be non-negative (they are error bars).
DistilledModel train_model_b(const Dataset& beta, const MLPConfig& config);

// Apply the model's own scaler, run the network, floor at sigma_floor.
// Input is expected in the same scaled feature space the model trained on.
Eigen::VectorXd predict_error_bar(const DistilledModel& b, const Eigen::MatrixXd& X_scaled);

// Deployment path: value from the accuracy model, error bar from the
// distilled model, exactly one forward pass through each. The ensemble is
// never touched; the value output is bit-identical to calling the accuracy
// model alone.
std::vector<CombinedPrediction> predict_combined(const MLPModel& model_a,
                                                 const DistilledModel& b,
                                                 const MinMaxScaler& alpha_scaler,
                                                 const Eigen::MatrixXd& X_raw);

}  // namespace errbar
