#pragma once

#include "desalt/common.hpp"

#include <cstdint>
#include <vector>

namespace desalt {

struct KernelSpec {
    double gamma = 1.0;
};

/// exp(-gamma * ||x - x'||^2); gamma = 1/(2 sigma^2).
double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& xp);

struct SvrParams {
    double C = 1.0;
    double gamma = 1.0;
    double epsilon = 0.1;
    /// Solver stops when the maximum KKT violation drops below this.
    double tol = 1e-3;
    /// 0 means 10000 * n.
    std::int64_t max_pair_updates = 0;
};

struct SvrModel {
    Matrix support_vectors;
    /// Per support vector: alpha'_i - alpha_i.
    Vector dual_coefs;
    double bias = 0.0;
    double gamma = 1.0;
    double C = 1.0;
    double epsilon = 0.1;
    Eigen::Index n_features = 0;
};

/// Solver diagnostics: full dual variables over all training rows, the
/// dual objective after every pairwise update (maximization form, so it is
/// non-decreasing), and the final KKT violation.
struct SvrSolution {
    Vector alpha;
    Vector alpha_star;
    std::vector<double> objective_trace;
    std::int64_t pair_updates = 0;
    double kkt_violation = 0.0;
};

class SvrConvergenceError : public ConvergenceError {
public:
    SvrConvergenceError(std::string msg, SvrSolution last)
        : ConvergenceError(std::move(msg)), last_iterate(std::move(last)) {}
    SvrSolution last_iterate;
};

/// Epsilon-insensitive support vector regression with a Gaussian kernel,
/// solved in the dual by sequential second-order pairwise updates over the
/// precomputed kernel matrix. Box and equality constraints hold after every
/// update. After convergence the per-sample pair (alpha, alpha') is reduced
/// by its minimum, so alpha_i * alpha'_i = 0 exactly.
SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrParams& params,
                 SvrSolution* solution = nullptr);

Vector predict_svr(const SvrModel& m, const Matrix& X);

}  // namespace desalt
