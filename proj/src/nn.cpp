#include "errbar/nn.hpp"

#include "errbar/errors.hpp"
#include "errbar/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace errbar {
namespace {

// Inference runs in fixed-height blocks, zero-padded at the tail. Identical
// GEMM shapes for every call mean a row's output never depends on how many
// rows ride along in the same batch; predictions on a prefix of a matrix are
// bit-identical to the same rows inside a larger call.
constexpr Eigen::Index kForwardBlockRows = 512;

void check_dims(const MLPModel& m, const Eigen::MatrixXd& X) {
    if (X.cols() != m.input_dim) {
        throw ValidationError("network expects " + std::to_string(m.input_dim) +
                              " features, got " + std::to_string(X.cols()));
    }
}

std::vector<Eigen::Index> layer_widths(Eigen::Index input_dim, const MLPConfig& config) {
    std::vector<Eigen::Index> widths;
    widths.push_back(input_dim);
    for (int w : config.hidden_widths) widths.push_back(w);
    widths.push_back(1);
    return widths;
}

// Per-batch activations and deltas, reused across steps of one training run.
struct BatchWorkspace {
    std::vector<Eigen::MatrixXd> z;    // pre-activations, layer l: B x out_l
    std::vector<Eigen::MatrixXd> act;  // ReLU(z), hidden layers only
    std::vector<Eigen::MatrixXd> dz;

    void resize(Eigen::Index batch, const MLPModel& m) {
        const auto layers = static_cast<std::size_t>(m.n_layers());
        z.resize(layers);
        act.resize(layers);
        dz.resize(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            const Eigen::Index out = m.weights[l].cols();
            z[l].resize(batch, out);
            dz[l].resize(batch, out);
            if (l + 1 < layers) act[l].resize(batch, out);
        }
    }
};

// Forward + exact backprop of batch-mean squared error. Gradients are written
// into `grads` (already shaped like the parameters).
double loss_and_grads_into(const MLPModel& m, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y, BatchWorkspace& ws,
                           MLPGradients& grads) {
    const int layers = m.n_layers();
    const Eigen::Index batch = X.rows();

    const Eigen::MatrixXd* a_prev = &X;
    for (int l = 0; l < layers; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        ws.z[lu].noalias() = (*a_prev) * m.weights[lu];
        ws.z[lu].rowwise() += m.biases[lu].transpose();
        if (l + 1 < layers) {
            ws.act[lu] = ws.z[lu].cwiseMax(0.0);
            a_prev = &ws.act[lu];
        }
    }

    const auto last = static_cast<std::size_t>(layers - 1);
    const Eigen::VectorXd resid = ws.z[last].col(0) - y;
    const double loss = resid.squaredNorm() / static_cast<double>(batch);

    ws.dz[last].col(0) = resid * (2.0 / static_cast<double>(batch));
    for (int l = layers - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const Eigen::MatrixXd& a_in = (l == 0) ? X : ws.act[lu - 1];
        grads.weights[lu].noalias() = a_in.transpose() * ws.dz[lu];
        grads.biases[lu] = ws.dz[lu].colwise().sum().transpose();
        if (l > 0) {
            ws.dz[lu - 1].noalias() = ws.dz[lu] * m.weights[lu].transpose();
            ws.dz[lu - 1].array() *= (ws.z[lu - 1].array() > 0.0).cast<double>();
        }
    }
    return loss;
}

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long t = 0;

    explicit AdamState(const MLPModel& model) {
        for (const auto& w : model.weights) {
            m_w.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
            v_w.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        }
        for (const auto& b : model.biases) {
            m_b.emplace_back(Eigen::VectorXd::Zero(b.size()));
            v_b.emplace_back(Eigen::VectorXd::Zero(b.size()));
        }
    }

    void step(MLPModel& model, const MLPGradients& grads, const MLPConfig& cfg) {
        ++t;
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            m_w[l] = cfg.adam_beta1 * m_w[l] + (1.0 - cfg.adam_beta1) * grads.weights[l];
            v_w[l].array() = cfg.adam_beta2 * v_w[l].array() +
                             (1.0 - cfg.adam_beta2) * grads.weights[l].array().square();
            model.weights[l].array() -= cfg.learning_rate * (m_w[l].array() / bc1) /
                                        ((v_w[l].array() / bc2).sqrt() + cfg.adam_epsilon);

            m_b[l] = cfg.adam_beta1 * m_b[l] + (1.0 - cfg.adam_beta1) * grads.biases[l];
            v_b[l].array() = cfg.adam_beta2 * v_b[l].array() +
                             (1.0 - cfg.adam_beta2) * grads.biases[l].array().square();
            model.biases[l].array() -= cfg.learning_rate * (m_b[l].array() / bc1) /
                                       ((v_b[l].array() / bc2).sqrt() + cfg.adam_epsilon);
        }
    }
};

MLPGradients make_gradients(const MLPModel& m) {
    MLPGradients g;
    for (const auto& w : m.weights) g.weights.emplace_back(w.rows(), w.cols());
    for (const auto& b : m.biases) g.biases.emplace_back(b.size());
    return g;
}

}  // namespace

void validate_config(const MLPConfig& config) {
    for (int w : config.hidden_widths) {
        if (w < 1) throw ValidationError("hidden width must be >= 1, got " + std::to_string(w));
    }
    if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw ValidationError("learning_rate must be positive and finite");
    }
    if (!(config.adam_beta1 > 0.0 && config.adam_beta1 < 1.0) ||
        !(config.adam_beta2 > 0.0 && config.adam_beta2 < 1.0)) {
        throw ValidationError("adam betas must lie in (0,1)");
    }
    if (!(config.adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be positive");
}

std::int64_t MLPModel::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += static_cast<std::int64_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::int64_t>(b.size());
    return n;
}

std::int64_t MLPModel::macs_per_row() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += static_cast<std::int64_t>(w.rows()) * w.cols();
    return n;
}

MLPModel init_mlp(Eigen::Index input_dim, const MLPConfig& config) {
    if (input_dim < 1) {
        throw ValidationError("input_dim must be >= 1, got " + std::to_string(input_dim));
    }
    validate_config(config);

    MLPModel m;
    m.config = config;
    m.input_dim = input_dim;
    const auto widths = layer_widths(input_dim, config);
    SplitMix64 gen(substream_seed(config.init_seed, {tag::kWeightInit}));
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const Eigen::Index fan_in = widths[l];
        const Eigen::Index fan_out = widths[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_in, fan_out);
        for (Eigen::Index i = 0; i < fan_in; ++i) {
            for (Eigen::Index j = 0; j < fan_out; ++j) {
                w(i, j) = bound * (2.0 * gen.uniform() - 1.0);
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(Eigen::VectorXd::Zero(fan_out));
    }
    m.trained = false;
    return m;
}

Eigen::VectorXd mlp_forward(const MLPModel& m, const Eigen::MatrixXd& X) {
    check_dims(m, X);
    const int layers = m.n_layers();
    Eigen::VectorXd out(X.rows());
    Eigen::MatrixXd a0(kForwardBlockRows, X.cols());
    Eigen::MatrixXd a, z;
    for (Eigen::Index start = 0; start < X.rows(); start += kForwardBlockRows) {
        const Eigen::Index rows = std::min(kForwardBlockRows, X.rows() - start);
        a0.topRows(rows) = X.middleRows(start, rows);
        if (rows < kForwardBlockRows) a0.bottomRows(kForwardBlockRows - rows).setZero();
        const Eigen::MatrixXd* in = &a0;
        for (int l = 0; l < layers; ++l) {
            const auto lu = static_cast<std::size_t>(l);
            z.noalias() = (*in) * m.weights[lu];
            z.rowwise() += m.biases[lu].transpose();
            if (l + 1 < layers) {
                a = z.cwiseMax(0.0);
                in = &a;
            } else {
                out.segment(start, rows) = z.col(0).head(rows);
            }
        }
    }
    return out;
}

std::pair<double, MLPGradients> mlp_loss_and_grads(const MLPModel& m, const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXd& y) {
    check_dims(m, X);
    if (X.rows() != y.size()) {
        throw ValidationError("feature rows and target length differ");
    }
    if (X.rows() < 1) throw ValidationError("empty batch");
    BatchWorkspace ws;
    ws.resize(X.rows(), m);
    MLPGradients grads = make_gradients(m);
    const double loss = loss_and_grads_into(m, X, y, ws, grads);
    return {loss, std::move(grads)};
}

std::pair<MLPModel, TrainReport> train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           const MLPConfig& config) {
    if (X.rows() != y.size()) {
        throw ValidationError("feature rows and target length differ");
    }
    if (X.rows() < 1) throw ValidationError("cannot train on an empty dataset");

    MLPModel model = init_mlp(X.cols(), config);
    const Eigen::Index n = X.rows();
    const Eigen::Index batch_size = std::min<Eigen::Index>(config.batch_size, n);

    AdamState adam(model);
    MLPGradients grads = make_gradients(model);
    BatchWorkspace ws;
    ws.resize(batch_size, model);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    SplitMix64 shuffle(substream_seed(config.shuffle_seed, {tag::kShuffle}));

    TrainReport report;
    report.epoch_losses.reserve(static_cast<std::size_t>(config.epochs));
    Eigen::MatrixXd xb(batch_size, X.cols());
    Eigen::VectorXd yb(batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (Eigen::Index i = n - 1; i > 0; --i) {
            const auto j =
                static_cast<Eigen::Index>(shuffle.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }

        double loss_sum = 0.0;
        for (Eigen::Index start = 0; start < n; start += batch_size) {
            const Eigen::Index rows = std::min(batch_size, n - start);
            if (rows != xb.rows()) {
                xb.resize(rows, X.cols());
                yb.resize(rows);
                ws.resize(rows, model);
            }
            for (Eigen::Index i = 0; i < rows; ++i) {
                const Eigen::Index src = perm[static_cast<std::size_t>(start + i)];
                xb.row(i) = X.row(src);
                yb[i] = y[src];
            }
            const double loss = loss_and_grads_into(model, xb, yb, ws, grads);
            if (!std::isfinite(loss)) {
                throw TrainingError("epoch " + std::to_string(epoch) +
                                    ": non-finite training loss");
            }
            adam.step(model, grads, config);
            loss_sum += loss * static_cast<double>(rows);
        }
        report.epoch_losses.push_back(loss_sum / static_cast<double>(n));
    }

    report.final_loss = report.epoch_losses.back();
    model.trained = true;
    return {std::move(model), std::move(report)};
}

}  // namespace errbar
