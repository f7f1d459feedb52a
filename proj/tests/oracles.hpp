// Independent reference implementations used to cross-check the library.
// Deliberately written with plain loops and Gaussian elimination rather
// than the library's own solvers, so agreement is evidence, not tautology.
#pragma once

#include "desalt/common.hpp"
#include "desalt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracles {

using desalt::Matrix;
using desalt::Vector;

/// Gaussian elimination with partial pivoting. Throws on (near-)singular.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) throw std::runtime_error("singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

struct LeastSquares {
    Vector weights;
    double bias = 0.0;
};

/// Normal equations on the bias-augmented design, solved by elimination.
inline LeastSquares least_squares(const Matrix& X, const Vector& y) {
    const size_t n = static_cast<size_t>(X.rows());
    const size_t d = static_cast<size_t>(X.cols());
    const size_t w = d + 1;
    std::vector<std::vector<double>> ata(w, std::vector<double>(w, 0.0));
    std::vector<double> aty(w, 0.0);
    for (size_t r = 0; r < n; ++r) {
        std::vector<double> row(w, 1.0);
        for (size_t c = 0; c < d; ++c) row[c] = X(static_cast<Eigen::Index>(r),
                                                  static_cast<Eigen::Index>(c));
        for (size_t i = 0; i < w; ++i) {
            aty[i] += row[i] * y(static_cast<Eigen::Index>(r));
            for (size_t j = 0; j < w; ++j) ata[i][j] += row[i] * row[j];
        }
    }
    std::vector<double> sol = solve_dense(std::move(ata), std::move(aty));
    LeastSquares out;
    out.weights = Vector(static_cast<Eigen::Index>(d));
    for (size_t c = 0; c < d; ++c) out.weights(static_cast<Eigen::Index>(c)) = sol[c];
    out.bias = sol[d];
    return out;
}

struct Stump {
    int feature = -1;
    double threshold = 0.0;
};

/// Exhaustive scan over every (feature, midpoint) candidate, minimizing the
/// summed child squared error; ties keep the lowest feature index, then the
/// lowest threshold. Returns nothing when no candidate strictly beats the
/// parent's squared error.
inline std::optional<Stump> best_stump(const Matrix& X, const Vector& y) {
    const Eigen::Index n = X.rows();
    double parent = 0.0;
    const double mean = y.mean();
    for (Eigen::Index r = 0; r < n; ++r) parent += (y(r) - mean) * (y(r) - mean);

    std::optional<Stump> best;
    double best_sse = parent;
    for (Eigen::Index f = 0; f < X.cols(); ++f) {
        std::vector<double> values;
        for (Eigen::Index r = 0; r < n; ++r) values.push_back(X(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (size_t v = 1; v < values.size(); ++v) {
            const double threshold = values[v - 1] + (values[v] - values[v - 1]) / 2.0;
            double ls = 0.0, lss = 0.0, rs = 0.0, rss = 0.0;
            Eigen::Index ln = 0, rn = 0;
            for (Eigen::Index r = 0; r < n; ++r) {
                if (X(r, f) <= threshold) {
                    ls += y(r);
                    lss += y(r) * y(r);
                    ++ln;
                } else {
                    rs += y(r);
                    rss += y(r) * y(r);
                    ++rn;
                }
            }
            if (ln == 0 || rn == 0) continue;
            const double sse = (lss - ls * ls / static_cast<double>(ln)) +
                               (rss - rs * rs / static_cast<double>(rn));
            if (sse < best_sse) {
                best_sse = sse;
                best = Stump{static_cast<int>(f), threshold};
            }
        }
    }
    return best;
}

/// Exact maximizer of the epsilon-insensitive SVR dual
///   W(b) = -1/2 b'Kb - eps*sum|b_i| + y'b,  sum b = 0,  |b_i| <= C
/// by enumerating per-coordinate states {at -C, negative-free, 0,
/// positive-free, at +C}: each pattern's stationarity system is linear, and
/// the optimum's own pattern is always among the 5^n candidates, so the
/// maximum over feasible candidates is the exact optimum.
inline double svr_dual_optimum(const Matrix& K, const Vector& y, double C, double eps) {
    const size_t n = static_cast<size_t>(y.size());
    std::vector<int> state(n, 0);  // 0:-C 1:free- 2:zero 3:free+ 4:+C
    double best = -std::numeric_limits<double>::infinity();

    auto objective = [&](const std::vector<double>& beta) {
        double quad = 0.0, lin = 0.0;
        for (size_t i = 0; i < n; ++i) {
            lin += y(static_cast<Eigen::Index>(i)) * beta[i] - eps * std::abs(beta[i]);
            for (size_t j = 0; j < n; ++j)
                quad += beta[i] *
                        K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                        beta[j];
        }
        return -0.5 * quad + lin;
    };

    while (true) {
        std::vector<size_t> free_idx;
        std::vector<double> beta(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            if (state[i] == 0) beta[i] = -C;
            else if (state[i] == 4) beta[i] = C;
            else if (state[i] != 2) free_idx.push_back(i);
        }
        const size_t m = free_idx.size();
        bool valid = true;
        if (m == 0) {
            double sum = 0.0;
            for (double b : beta) sum += b;
            valid = std::abs(sum) < 1e-12;
        } else {
            // Unknowns: free betas and the equality multiplier mu.
            // Stationarity for free i: (K beta)_i + s_i*eps - y_i + mu = 0,
            // s_i = sign assumed by the state.
            std::vector<std::vector<double>> a(m + 1, std::vector<double>(m + 1, 0.0));
            std::vector<double> rhs(m + 1, 0.0);
            for (size_t r = 0; r < m; ++r) {
                const auto i = static_cast<Eigen::Index>(free_idx[r]);
                const double sign = state[free_idx[r]] == 3 ? 1.0 : -1.0;
                for (size_t c = 0; c < m; ++c)
                    a[r][c] = K(i, static_cast<Eigen::Index>(free_idx[c]));
                a[r][m] = 1.0;
                double fixed = 0.0;
                for (size_t j = 0; j < n; ++j)
                    if (state[j] == 0 || state[j] == 4)
                        fixed += K(i, static_cast<Eigen::Index>(j)) * beta[j];
                rhs[r] = y(i) - sign * eps - fixed;
            }
            double fixed_sum = 0.0;
            for (double b : beta) fixed_sum += b;
            for (size_t c = 0; c < m; ++c) a[m][c] = 1.0;
            rhs[m] = -fixed_sum;
            try {
                std::vector<double> sol = solve_dense(std::move(a), std::move(rhs));
                for (size_t r = 0; r < m; ++r) beta[free_idx[r]] = sol[r];
            } catch (const std::runtime_error&) {
                valid = false;
            }
            if (valid)
                for (size_t r = 0; r < m; ++r)
                    if (std::abs(beta[free_idx[r]]) > C + 1e-9) valid = false;
        }
        if (valid) best = std::max(best, objective(beta));

        size_t pos = 0;
        while (pos < n && ++state[pos] == 5) state[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

/// Central finite differences of the training MSE with respect to every
/// parameter, using only the forward pass.
inline desalt::MlpGradients mlp_fd_gradients(const desalt::MlpModel& model, const Matrix& X,
                                             const Vector& y, double h = 1e-5) {
    desalt::MlpModel work = model;
    const double n = static_cast<double>(X.rows());
    auto loss = [&] {
        return (desalt::mlp_forward(work, X) - y).squaredNorm() / n;
    };
    desalt::MlpGradients g;
    g.weights.resize(model.weights.size());
    g.biases.resize(model.biases.size());
    for (size_t l = 0; l < model.weights.size(); ++l) {
        g.weights[l] = Matrix::Zero(model.weights[l].rows(), model.weights[l].cols());
        for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i)
            for (Eigen::Index j = 0; j < model.weights[l].cols(); ++j) {
                work.weights[l](i, j) = model.weights[l](i, j) + h;
                const double up = loss();
                work.weights[l](i, j) = model.weights[l](i, j) - h;
                const double down = loss();
                work.weights[l](i, j) = model.weights[l](i, j);
                g.weights[l](i, j) = (up - down) / (2.0 * h);
            }
        g.biases[l] = Vector::Zero(model.biases[l].size());
        for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) {
            work.biases[l](i) = model.biases[l](i) + h;
            const double up = loss();
            work.biases[l](i) = model.biases[l](i) - h;
            const double down = loss();
            work.biases[l](i) = model.biases[l](i);
            g.biases[l](i) = (up - down) / (2.0 * h);
        }
    }
    return g;
}

/// Largest relative discrepancy between analytic and finite-difference
/// gradients, with the |a|+|b| floor guarding near-zero entries.
inline double max_gradient_gap(const desalt::MlpGradients& analytic,
                               const desalt::MlpGradients& numeric) {
    double worst = 0.0;
    auto gap = [&](double a, double b) {
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a) + std::abs(b)));
    };
    for (size_t l = 0; l < analytic.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < analytic.weights[l].rows(); ++i)
            for (Eigen::Index j = 0; j < analytic.weights[l].cols(); ++j)
                gap(analytic.weights[l](i, j), numeric.weights[l](i, j));
        for (Eigen::Index i = 0; i < analytic.biases[l].size(); ++i)
            gap(analytic.biases[l](i), numeric.biases[l](i));
    }
    return worst;
}

/// Plain-loop metric re-implementations.
inline double brute_mse(const Vector& a, const Vector& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += (a(i) - p(i)) * (a(i) - p(i));
    return s / static_cast<double>(a.size());
}

inline double brute_mae(const Vector& a, const Vector& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += std::abs(a(i) - p(i));
    return s / static_cast<double>(a.size());
}

inline double brute_r2(const Vector& a, const Vector& p) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) mean += a(i);
    mean /= static_cast<double>(a.size());
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        num += (a(i) - p(i)) * (a(i) - p(i));
        den += (a(i) - mean) * (a(i) - mean);
    }
    return 1.0 - num / den;
}

/// Cubic least squares through normal equations on the Vandermonde design.
inline std::vector<double> cubic_fit(const Vector& c, const Vector& delta) {
    const size_t n = static_cast<size_t>(c.size());
    std::vector<std::vector<double>> ata(4, std::vector<double>(4, 0.0));
    std::vector<double> aty(4, 0.0);
    for (size_t r = 0; r < n; ++r) {
        double row[4] = {1.0, 0.0, 0.0, 0.0};
        for (int k = 1; k < 4; ++k) row[k] = row[k - 1] * c(static_cast<Eigen::Index>(r));
        for (int i = 0; i < 4; ++i) {
            aty[static_cast<size_t>(i)] += row[i] * delta(static_cast<Eigen::Index>(r));
            for (int j = 0; j < 4; ++j) ata[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                row[i] * row[j];
        }
    }
    return solve_dense(std::move(ata), std::move(aty));
}

}  // namespace oracles
