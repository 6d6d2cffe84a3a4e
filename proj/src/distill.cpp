#include "errbar/distill.hpp"

#include "errbar/errors.hpp"

#include <string>

namespace errbar {

DistilledModel train_model_b(const Dataset& beta, const MLPConfig& config) {
    if (beta.n_rows() < 1) throw ValidationError("train_model_b: empty dataset");
    if ((beta.targets.array() < 0.0).any()) {
        throw ValidationError("train_model_b: targets are error bars and must be >= 0");
    }

    DistilledModel b;
    b.input_scaler = fit_scaler(beta);
    const Eigen::MatrixXd X = b.input_scaler.transform(beta.features);
    auto [net, report] = train_mlp(X, beta.targets, config);
    b.net = std::move(net);
    return b;
}

Eigen::VectorXd predict_error_bar(const DistilledModel& b, const Eigen::MatrixXd& X_scaled) {
    const Eigen::VectorXd raw = mlp_forward(b.net, b.input_scaler.transform(X_scaled));
    return raw.cwiseMax(b.sigma_floor);
}

std::vector<CombinedPrediction> predict_combined(const MLPModel& model_a,
                                                 const DistilledModel& b,
                                                 const MinMaxScaler& alpha_scaler,
                                                 const Eigen::MatrixXd& X_raw) {
    if (X_raw.cols() != alpha_scaler.n_features()) {
        throw ValidationError("predict_combined: input has " + std::to_string(X_raw.cols()) +
                              " features, scaler expects " +
                              std::to_string(alpha_scaler.n_features()));
    }
    const Eigen::MatrixXd X_scaled = alpha_scaler.transform(X_raw);
    // One pass through each network; the ensemble plays no part here.
    const Eigen::VectorXd values = mlp_forward(model_a, X_scaled);
    const Eigen::VectorXd bars = predict_error_bar(b, X_scaled);

    std::vector<CombinedPrediction> out(static_cast<std::size_t>(X_raw.rows()));
    for (Eigen::Index i = 0; i < X_raw.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = {values[i], bars[i]};
    }
    return out;
}

}  // namespace errbar
