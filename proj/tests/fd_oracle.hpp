#pragma once

#include "errbar/nn.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

// Finite-difference gradient oracle, independent of the library's forward
// and backward passes: the loss below is plain nested loops.

namespace errbar::test {

inline double naive_loss(const MLPModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        std::vector<double> a(static_cast<std::size_t>(X.cols()));
        for (Eigen::Index j = 0; j < X.cols(); ++j) a[static_cast<std::size_t>(j)] = X(r, j);
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            const auto& w = m.weights[l];
            std::vector<double> z(static_cast<std::size_t>(w.cols()), 0.0);
            for (Eigen::Index o = 0; o < w.cols(); ++o) {
                double acc = m.biases[l][o];
                for (Eigen::Index i = 0; i < w.rows(); ++i) {
                    acc += a[static_cast<std::size_t>(i)] * w(i, o);
                }
                z[static_cast<std::size_t>(o)] = acc;
            }
            if (l + 1 < m.weights.size()) {
                for (auto& v : z) v = v > 0.0 ? v : 0.0;
            }
            a = std::move(z);
        }
        const double diff = a[0] - y[r];
        total += diff * diff;
    }
    return total / static_cast<double>(X.rows());
}

// Smallest |pre-activation| over all hidden units and rows. Finite
// differences are only meaningful away from the ReLU kink: a parameter step
// of h moves any pre-activation by at most ~h * max|activation|, so a margin
// of 1e-3 at h = 1e-5 keeps every activation pattern fixed during the check.
inline double min_abs_preactivation(const MLPModel& m, const Eigen::MatrixXd& X) {
    double min_abs = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        std::vector<double> a(static_cast<std::size_t>(X.cols()));
        for (Eigen::Index j = 0; j < X.cols(); ++j) a[static_cast<std::size_t>(j)] = X(r, j);
        for (std::size_t l = 0; l + 1 < m.weights.size(); ++l) {
            const auto& w = m.weights[l];
            std::vector<double> z(static_cast<std::size_t>(w.cols()), 0.0);
            for (Eigen::Index o = 0; o < w.cols(); ++o) {
                double acc = m.biases[l][o];
                for (Eigen::Index i = 0; i < w.rows(); ++i) {
                    acc += a[static_cast<std::size_t>(i)] * w(i, o);
                }
                min_abs = std::min(min_abs, std::abs(acc));
                z[static_cast<std::size_t>(o)] = acc > 0.0 ? acc : 0.0;
            }
            a = std::move(z);
        }
    }
    return min_abs;
}

// Worst relative deviation between analytic gradients and central finite
// differences (absolute floor 1e-8), over every parameter.
inline double worst_gradient_deviation(const MLPModel& m, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, double h = 1e-5) {
    const auto [loss, grads] = mlp_loss_and_grads(m, X, y);
    (void)loss;
    double worst = 0.0;
    const auto measure = [&](double analytic, double plus, double minus) {
        const double fd = (plus - minus) / (2.0 * h);
        const double scale = std::max({1e-8 / 1e-4, std::abs(analytic), std::abs(fd)});
        worst = std::max(worst, std::abs(analytic - fd) / scale);
    };
    MLPModel probe = m;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
            for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j) {
                const double orig = probe.weights[l](i, j);
                probe.weights[l](i, j) = orig + h;
                const double plus = naive_loss(probe, X, y);
                probe.weights[l](i, j) = orig - h;
                const double minus = naive_loss(probe, X, y);
                probe.weights[l](i, j) = orig;
                measure(grads.weights[l](i, j), plus, minus);
            }
        }
        for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
            const double orig = probe.biases[l][i];
            probe.biases[l][i] = orig + h;
            const double plus = naive_loss(probe, X, y);
            probe.biases[l][i] = orig - h;
            const double minus = naive_loss(probe, X, y);
            probe.biases[l][i] = orig;
            measure(grads.biases[l][i], plus, minus);
        }
    }
    return worst;
}

}  // namespace errbar::test
