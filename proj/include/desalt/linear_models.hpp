#pragma once

#include "desalt/common.hpp"

#include <vector>

namespace desalt {

/// Linear predictor y = X w + b.
struct LinearModel {
    Vector weights;
    double bias = 0.0;
};

/// Lasso coordinate descent ran out of sweeps. Carries the last iterate so
/// callers can inspect or keep it.
class LassoConvergenceError : public ConvergenceError {
public:
    LassoConvergenceError(std::string msg, LinearModel last)
        : ConvergenceError(std::move(msg)), last_iterate(std::move(last)) {}
    LinearModel last_iterate;
};

/// Ordinary least squares, minimum-norm solution on rank-deficient designs.
LinearModel fit_plain(const Matrix& X, const Vector& y);

/// Ridge regression. Objective: (1/m)||y - Xw - b||^2 + lambda ||w||^2.
/// The intercept is not penalized.
LinearModel fit_ridge(const Matrix& X, const Vector& y, double lambda);

/// Lasso. Objective: (1/m)||y - Xw - b||^2 + lambda ||w||_1, intercept
/// unpenalized, solved by cyclic coordinate descent with soft thresholding.
/// Converged when no coefficient moves more than `tol` in a full sweep.
/// `objective_trace`, when given, receives the objective after every sweep.
LinearModel fit_lasso(const Matrix& X, const Vector& y, double lambda, double tol = 1e-6,
                      int max_sweeps = 10000, std::vector<double>* objective_trace = nullptr);

Vector predict_linear(const LinearModel& m, const Matrix& X);

/// Penalized-objective value, shared by the trainers and their tests.
double lasso_objective(const Matrix& X, const Vector& y, const LinearModel& m, double lambda);
double ridge_objective(const Matrix& X, const Vector& y, const LinearModel& m, double lambda);

/// Smallest lambda at which the lasso solution is all-zero weights.
double lasso_full_shrinkage_lambda(const Matrix& X, const Vector& y);

}  // namespace desalt
