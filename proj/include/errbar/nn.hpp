#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

// Feed-forward ReLU network trained with Adam on mean squared error. This is
// the single learner shared by the accuracy model, the ensemble members and
// the distilled error-bar model. Everything is double precision and fully
// determined by (data, config): retraining with identical inputs reproduces
// bit-identical weights.

namespace errbar {

struct MLPConfig {
    // Desk-scale default; widths of 2048 match the full-scale profile and are
    // plain config values, not a separate code path.
    std::vector<int> hidden_widths{64, 64};
    int epochs = 100;
    double learning_rate = 1e-3;
    int batch_size = 64;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t init_seed = 0;
    std::uint64_t shuffle_seed = 0;
};

void validate_config(const MLPConfig& config);

struct MLPModel {
    std::vector<Eigen::MatrixXd> weights;  // layer l: in_dim x out_dim
    std::vector<Eigen::VectorXd> biases;   // layer l: out_dim
    MLPConfig config;
    Eigen::Index input_dim = 0;
    bool trained = false;

    int n_layers() const { return static_cast<int>(weights.size()); }
    std::int64_t parameter_count() const;
    // Multiply-accumulate count of one forward row; the currency of the
    // ensemble-vs-distilled cost comparison.
    std::int64_t macs_per_row() const;
};

struct TrainReport {
    std::vector<double> epoch_losses;  // batch-size-weighted training MSE per epoch
    double final_loss = 0.0;
};

struct MLPGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// He-uniform weights (bound sqrt(6/fan_in)) from the init_seed stream, zero
// biases, output width 1.
MLPModel init_mlp(Eigen::Index input_dim, const MLPConfig& config);

// Hidden layers ReLU, output layer linear; one scalar per row.
Eigen::VectorXd mlp_forward(const MLPModel& m, const Eigen::MatrixXd& X);

// Mean squared error over rows and its exact backprop gradients.
std::pair<double, MLPGradients> mlp_loss_and_grads(const MLPModel& m,
                                                   const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXd& y);

// Full Adam training loop: per-epoch reshuffle, mini-batches (last one may be
// short), bias-corrected moment updates. Throws TrainingError if the loss
// goes non-finite, naming the epoch.
std::pair<MLPModel, TrainReport> train_mlp(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& y,
                                           const MLPConfig& config);

}  // namespace errbar
