#include "desalt/mlp.hpp"

#include "desalt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace desalt {

namespace {

void check_design(const Matrix& X, const Vector& y) {
    if (X.rows() == 0 || X.cols() == 0)
        throw ValidationError("design matrix must be non-empty");
    if (X.rows() != y.size())
        throw ValidationError("design matrix has " + std::to_string(X.rows()) +
                              " rows but target has " + std::to_string(y.size()));
    if (!X.allFinite() || !y.allFinite())
        throw ValidationError("design matrix and target must be finite");
}

void check_input_dim(const MlpModel& m, const Matrix& X) {
    if (m.layer_sizes.empty()) throw ValidationError("model has no layers");
    if (X.cols() != m.layer_sizes.front())
        throw ValidationError("network expects " + std::to_string(m.layer_sizes.front()) +
                              " inputs, got " + std::to_string(X.cols()));
}

/// Activations per layer, row-major batches: activations[l] is n x layer_sizes[l].
std::vector<Matrix> forward_pass(const MlpModel& m, const Matrix& X) {
    std::vector<Matrix> activations;
    activations.reserve(m.weights.size() + 1);
    activations.push_back(X);
    for (size_t l = 0; l < m.weights.size(); ++l) {
        Matrix z = (activations.back() * m.weights[l].transpose()).rowwise() +
                   m.biases[l].transpose();
        if (l + 1 < m.weights.size()) z = z.cwiseMax(0.0);
        activations.push_back(std::move(z));
    }
    return activations;
}

}  // namespace

MlpModel init_mlp(Eigen::Index input_dim, const std::vector<int>& hidden_sizes,
                  std::uint64_t seed) {
    if (input_dim < 1) throw ValidationError("network needs at least one input");
    for (int h : hidden_sizes)
        if (h < 1) throw ValidationError("hidden layer sizes must be positive");
    MlpModel m;
    m.seed = seed;
    m.layer_sizes.push_back(input_dim);
    for (int h : hidden_sizes) m.layer_sizes.push_back(h);
    m.layer_sizes.push_back(1);
    Rng rng(seed);
    for (size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const Eigen::Index fan_in = m.layer_sizes[l];
        const Eigen::Index fan_out = m.layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < fan_out; ++i)
            for (Eigen::Index j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.push_back(Vector::Zero(fan_out));
    }
    return m;
}

Vector mlp_forward(const MlpModel& m, const Matrix& X) {
    check_input_dim(m, X);
    return forward_pass(m, X).back().col(0);
}

double mlp_loss_and_gradients(const MlpModel& m, const Matrix& X, const Vector& y,
                              MlpGradients& grads) {
    check_input_dim(m, X);
    check_design(X, y);
    const double n = static_cast<double>(X.rows());
    std::vector<Matrix> acts = forward_pass(m, X);
    Vector diff = acts.back().col(0) - y;
    const double loss = diff.squaredNorm() / n;

    grads.weights.resize(m.weights.size());
    grads.biases.resize(m.biases.size());
    Matrix delta = (2.0 / n) * diff;
    for (size_t l = m.weights.size(); l-- > 0;) {
        grads.weights[l] = delta.transpose() * acts[l];
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = delta * m.weights[l];
            delta.array() *= (acts[l].array() > 0.0).cast<double>();
        }
    }
    return loss;
}

MlpModel fit_mlp(const Matrix& X, const Vector& y, const std::vector<int>& hidden_sizes,
                 const TrainConfig& config, std::uint64_t seed) {
    check_design(X, y);
    if (X.rows() < 2) throw ValidationError("training needs at least 2 rows");
    if (!(config.learning_rate > 0.0))
        throw ValidationError("learning rate must be positive");
    if (config.max_epochs < 0) throw ValidationError("max_epochs must be non-negative");
    if (config.batch_size < 0) throw ValidationError("batch_size must be non-negative");
    if (!(config.tolerance >= 0.0)) throw ValidationError("tolerance must be non-negative");

    const Eigen::Index n = X.rows();
    MlpModel model = init_mlp(X.cols(), hidden_sizes, seed);
    MlpGradients grads;

    auto full_loss = [&] {
        return (mlp_forward(model, X) - y).squaredNorm() / static_cast<double>(n);
    };

    MlpModel best = model;
    double best_loss = full_loss();

    // Adam moments, lazily shaped to the parameters.
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    for (size_t l = 0; l < model.weights.size(); ++l) {
        mw.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vw.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
        mb.push_back(Vector::Zero(model.biases[l].size()));
        vb.push_back(Vector::Zero(model.biases[l].size()));
    }
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    long step_count = 0;

    auto apply_step = [&](const MlpGradients& g) {
        if (config.optimizer == Optimizer::sgd) {
            for (size_t l = 0; l < model.weights.size(); ++l) {
                model.weights[l] -= config.learning_rate * g.weights[l];
                model.biases[l] -= config.learning_rate * g.biases[l];
            }
            return;
        }
        ++step_count;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (size_t l = 0; l < model.weights.size(); ++l) {
            mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.weights[l];
            vw[l] = beta2 * vw[l] + (1.0 - beta2) * g.weights[l].cwiseProduct(g.weights[l]);
            model.weights[l].array() -=
                config.learning_rate * (mw[l].array() / c1) /
                ((vw[l].array() / c2).sqrt() + adam_eps);
            mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.biases[l];
            vb[l] = beta2 * vb[l] + (1.0 - beta2) * g.biases[l].cwiseProduct(g.biases[l]);
            model.biases[l].array() -= config.learning_rate * (mb[l].array() / c1) /
                                       ((vb[l].array() / c2).sqrt() + adam_eps);
        }
    };

    const Eigen::Index batch =
        config.batch_size == 0 ? n : std::min<Eigen::Index>(config.batch_size, n);
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    double prev_loss = best_loss;
    int stall = 0;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        if (batch < n) {
            Rng shuffle_rng(derive_seed(seed, static_cast<std::uint64_t>(epoch) + 1));
            for (Eigen::Index i = n - 1; i > 0; --i) {
                Eigen::Index j = static_cast<Eigen::Index>(
                    shuffle_rng.below(static_cast<std::uint64_t>(i + 1)));
                std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
            }
        }
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index size = std::min(batch, n - start);
            Matrix xb(size, X.cols());
            Vector yb(size);
            for (Eigen::Index r = 0; r < size; ++r) {
                xb.row(r) = X.row(order[static_cast<size_t>(start + r)]);
                yb(r) = y(order[static_cast<size_t>(start + r)]);
            }
            mlp_loss_and_gradients(model, xb, yb, grads);
            apply_step(grads);
        }
        const double loss = full_loss();
        if (!std::isfinite(loss))
            throw DivergenceError("training loss became non-finite at epoch " +
                                  std::to_string(epoch));
        if (loss < best_loss) {
            best_loss = loss;
            best = model;
        }
        stall = (prev_loss - loss < config.tolerance) ? stall + 1 : 0;
        prev_loss = loss;
        if (stall >= 10) break;
    }
    return best;
}

}  // namespace desalt
