#pragma once

#include "desalt/common.hpp"

#include <cstdint>
#include <vector>

namespace desalt {

/// Fully connected feed-forward regressor: ReLU hidden layers, identity
/// output of width 1. weights[l] has shape layer_sizes[l+1] x layer_sizes[l].
struct MlpModel {
    std::vector<Eigen::Index> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::uint64_t seed = 0;
};

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

enum class Optimizer { adam, sgd };

struct TrainConfig {
    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 1e-3;
    int max_epochs = 1000;
    /// 0 trains full-batch; otherwise minibatches in a seeded shuffle order.
    int batch_size = 0;
    /// Stop after 10 consecutive epochs whose loss improvement is below this.
    double tolerance = 1e-8;
};

/// Training loss became non-finite.
class DivergenceError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// Symmetric scaled-uniform initialization, bound sqrt(6/(fan_in+fan_out)),
/// zero biases, drawn from a deterministic stream.
MlpModel init_mlp(Eigen::Index input_dim, const std::vector<int>& hidden_sizes,
                  std::uint64_t seed);

Vector mlp_forward(const MlpModel& m, const Matrix& X);

/// Mean-squared-error loss over the batch and its reverse-mode gradients.
double mlp_loss_and_gradients(const MlpModel& m, const Matrix& X, const Vector& y,
                              MlpGradients& grads);

/// Returns the parameters with the best full-data training loss observed,
/// the initialization included.
MlpModel fit_mlp(const Matrix& X, const Vector& y, const std::vector<int>& hidden_sizes,
                 const TrainConfig& config, std::uint64_t seed);

}  // namespace desalt
