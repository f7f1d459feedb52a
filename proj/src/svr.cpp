#include "desalt/svr.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace desalt {

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& xp) {
    if (x.size() != xp.size())
        throw ValidationError("kernel arguments have different dimensions");
    if (!(spec.gamma > 0.0)) throw ValidationError("kernel gamma must be positive");
    return std::exp(-spec.gamma * (x - xp).squaredNorm());
}

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

/// The dual is solved over 2n variables u = [alpha'; alpha] with signs
/// lambda = [+1...; -1...], linear term p = [eps - y; eps + y], quadratic
/// term coded from the kernel matrix. The prediction coefficient of sample
/// i is alpha'_i - alpha_i = lambda-weighted sum of its two variables.
struct DualState {
    const Matrix& K;
    Eigen::Index n;
    double C;
    Vector u;
    Vector lambda;
    Vector p;
    Vector grad;

    Eigen::Index point(Eigen::Index k) const { return k % n; }

    bool in_up(Eigen::Index k) const {
        return lambda(k) > 0 ? u(k) < C : u(k) > 0.0;
    }
    bool in_low(Eigen::Index k) const {
        return lambda(k) > 0 ? u(k) > 0.0 : u(k) < C;
    }
    /// The quantity whose spread measures KKT violation.
    double score(Eigen::Index k) const { return -lambda(k) * grad(k); }

    /// Maximization-form dual objective -f(u) = -(1/2) u' (grad + p).
    double objective() const { return -0.5 * u.dot(grad + p); }
};

}  // namespace

SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrParams& params,
                 SvrSolution* solution) {
    check_design(X, y);
    if (!(params.C > 0.0)) throw ValidationError("svr C must be positive");
    if (!(params.gamma > 0.0)) throw ValidationError("svr gamma must be positive");
    if (!(params.epsilon >= 0.0)) throw ValidationError("svr epsilon must be non-negative");
    if (!(params.tol > 0.0)) throw ValidationError("svr tolerance must be positive");

    const Eigen::Index n = X.rows();
    const std::int64_t max_updates =
        params.max_pair_updates > 0 ? params.max_pair_updates : 10000 * n;

    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double k = std::exp(-params.gamma * (X.row(i) - X.row(j)).squaredNorm());
            K(i, j) = k;
            K(j, i) = k;
        }
    }

    DualState s{K, n, params.C, Vector::Zero(2 * n), Vector(2 * n), Vector(2 * n), {}};
    for (Eigen::Index i = 0; i < n; ++i) {
        s.lambda(i) = 1.0;
        s.lambda(n + i) = -1.0;
        s.p(i) = params.epsilon - y(i);
        s.p(n + i) = params.epsilon + y(i);
    }
    s.grad = s.p;

    SvrSolution sol;
    auto record = [&] {
        if (solution) sol.objective_trace.push_back(s.objective());
    };
    record();

    std::int64_t updates = 0;
    double violation = std::numeric_limits<double>::infinity();
    while (true) {
        Eigen::Index i = -1;
        double m_up = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < 2 * n; ++k)
            if (s.in_up(k) && s.score(k) > m_up) {
                m_up = s.score(k);
                i = k;
            }
        double m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < 2 * n; ++k)
            if (s.in_low(k) && s.score(k) < m_low) m_low = s.score(k);
        violation = m_up - m_low;
        if (i < 0 || violation <= params.tol) break;

        // Second-order partner: maximize the guaranteed objective gain
        // b^2 / a among admissible candidates.
        Eigen::Index j = -1;
        double best_gain = -1.0;
        const Eigen::Index pi = s.point(i);
        for (Eigen::Index k = 0; k < 2 * n; ++k) {
            if (!s.in_low(k)) continue;
            double b = m_up - s.score(k);
            if (b <= 0.0) continue;
            double a = 2.0 - 2.0 * K(pi, s.point(k));
            if (a < 1e-12) a = 1e-12;
            double gain = b * b / a;
            if (gain > best_gain) {
                best_gain = gain;
                j = k;
            }
        }
        if (j < 0) break;

        double b = m_up - s.score(j);
        double a = 2.0 - 2.0 * K(pi, s.point(j));
        if (a < 1e-12) a = 1e-12;
        double step = b / a;
        double cap_i = s.lambda(i) > 0 ? params.C - s.u(i) : s.u(i);
        double cap_j = s.lambda(j) > 0 ? s.u(j) : params.C - s.u(j);
        step = std::min(step, std::min(cap_i, cap_j));
        s.u(i) += s.lambda(i) * step;
        s.u(j) -= s.lambda(j) * step;
        s.u(i) = std::min(std::max(s.u(i), 0.0), params.C);
        s.u(j) = std::min(std::max(s.u(j), 0.0), params.C);

        const Eigen::Index pj = s.point(j);
        for (Eigen::Index k = 0; k < 2 * n; ++k)
            s.grad(k) += step * s.lambda(k) * (K(s.point(k), pi) - K(s.point(k), pj));
        record();

        if (++updates >= max_updates) {
            sol.alpha_star = s.u.head(n);
            sol.alpha = s.u.tail(n);
            sol.pair_updates = updates;
            sol.kkt_violation = violation;
            if (solution) *solution = sol;
            throw SvrConvergenceError(
                "svr did not converge within " + std::to_string(max_updates) +
                    " pair updates (KKT violation " + std::to_string(violation) + ")",
                std::move(sol));
        }
    }

    // Exact per-sample complementarity: shrink each (alpha', alpha) pair by
    // its minimum. The prediction coefficients and the equality constraint
    // are unchanged and the objective cannot get worse.
    for (Eigen::Index i = 0; i < n; ++i) {
        double mu = std::min(s.u(i), s.u(n + i));
        if (mu > 0.0) {
            s.u(i) -= mu;
            s.u(n + i) -= mu;
        }
    }

    // Bias from the multiplier of the equality constraint: free variables
    // pin it exactly; otherwise the KKT interval midpoint.
    double free_sum = 0.0;
    Eigen::Index free_count = 0;
    double ub = -std::numeric_limits<double>::infinity();
    double lb = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < 2 * n; ++k) {
        if (s.u(k) > 0.0 && s.u(k) < params.C) {
            free_sum += s.score(k);
            ++free_count;
        }
        if (s.in_up(k)) ub = std::max(ub, s.score(k));
        if (s.in_low(k)) lb = std::min(lb, s.score(k));
    }
    double bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                 : (ub + lb) / 2.0;

    Vector coef = s.u.head(n) - s.u.tail(n);
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < n; ++i)
        if (coef(i) != 0.0) sv.push_back(i);

    SvrModel model;
    model.gamma = params.gamma;
    model.C = params.C;
    model.epsilon = params.epsilon;
    model.n_features = X.cols();
    model.support_vectors = Matrix(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.dual_coefs = Vector(static_cast<Eigen::Index>(sv.size()));
    for (size_t r = 0; r < sv.size(); ++r) {
        model.support_vectors.row(static_cast<Eigen::Index>(r)) = X.row(sv[r]);
        model.dual_coefs(static_cast<Eigen::Index>(r)) = coef(sv[r]);
    }
    model.bias = bias;

    if (solution) {
        sol.alpha_star = s.u.head(n);
        sol.alpha = s.u.tail(n);
        sol.pair_updates = updates;
        sol.kkt_violation = violation;
        *solution = std::move(sol);
    }
    return model;
}

Vector predict_svr(const SvrModel& m, const Matrix& X) {
    if (X.cols() != m.n_features)
        throw ValidationError("svr model expects " + std::to_string(m.n_features) +
                              " features, got " + std::to_string(X.cols()));
    Vector out = Vector::Constant(X.rows(), m.bias);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < m.support_vectors.rows(); ++j)
            out(i) += m.dual_coefs(j) *
                      std::exp(-m.gamma *
                               (X.row(i) - m.support_vectors.row(j)).squaredNorm());
    return out;
}

}  // namespace desalt
