#include "desalt/linear_models.hpp"

#include <Eigen/Dense>

#include <cmath>
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

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

}  // namespace

LinearModel fit_plain(const Matrix& X, const Vector& y) {
    check_design(X, y);
    Matrix aug(X.rows(), X.cols() + 1);
    aug << X, Vector::Ones(X.rows());
    Vector sol = aug.completeOrthogonalDecomposition().solve(y);
    LinearModel m;
    m.weights = sol.head(X.cols());
    m.bias = sol(X.cols());
    return m;
}

LinearModel fit_ridge(const Matrix& X, const Vector& y, double lambda) {
    check_design(X, y);
    if (!(lambda >= 0.0)) throw ValidationError("ridge lambda must be non-negative");
    const double m = static_cast<double>(X.rows());
    Vector xmean = X.colwise().mean();
    double ymean = y.mean();
    Matrix Xc = X.rowwise() - xmean.transpose();
    Vector yc = y.array() - ymean;
    Matrix gram = Xc.transpose() * Xc / m;
    gram.diagonal().array() += lambda;
    Vector rhs = Xc.transpose() * yc / m;
    LinearModel model;
    model.weights = gram.ldlt().solve(rhs);
    model.bias = ymean - model.weights.dot(xmean);
    return model;
}

LinearModel fit_lasso(const Matrix& X, const Vector& y, double lambda, double tol,
                      int max_sweeps, std::vector<double>* objective_trace) {
    check_design(X, y);
    if (!(lambda >= 0.0)) throw ValidationError("lasso lambda must be non-negative");
    if (!(tol > 0.0)) throw ValidationError("lasso tolerance must be positive");
    if (max_sweeps < 1) throw ValidationError("lasso needs at least one sweep");
    const double m = static_cast<double>(X.rows());
    const Eigen::Index d = X.cols();

    // Descend in centered coordinates: with the intercept at its optimum
    // b = ȳ − w·x̄ the residuals are identical, so the minimizer is the
    // same, but the coordinate updates decouple from the intercept.
    Vector xmean = X.colwise().mean();
    double ymean = y.mean();
    Matrix Xc = X.rowwise() - xmean.transpose();
    Vector col_sq(d);
    for (Eigen::Index j = 0; j < d; ++j) col_sq(j) = Xc.col(j).squaredNorm();

    LinearModel model;
    model.weights = Vector::Zero(d);
    double bias_c = 0.0;
    Vector residual = y.array() - ymean;
    if (objective_trace) objective_trace->clear();

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_move = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (col_sq(j) == 0.0) continue;
            double old_w = model.weights(j);
            double corr = Xc.col(j).dot(residual) + col_sq(j) * old_w;
            double new_w = soft_threshold(corr / m, lambda / 2.0) / (col_sq(j) / m);
            if (new_w != old_w) {
                residual -= Xc.col(j) * (new_w - old_w);
                model.weights(j) = new_w;
                max_move = std::max(max_move, std::abs(new_w - old_w));
            }
        }
        double bias_shift = residual.mean();
        if (bias_shift != 0.0) {
            bias_c += bias_shift;
            residual.array() -= bias_shift;
            max_move = std::max(max_move, std::abs(bias_shift));
        }
        model.bias = bias_c + ymean - model.weights.dot(xmean);
        if (objective_trace)
            objective_trace->push_back(lasso_objective(X, y, model, lambda));
        if (max_move <= tol) return model;
    }
    throw LassoConvergenceError(
        "lasso did not converge within " + std::to_string(max_sweeps) +
            " sweeps (tolerance " + std::to_string(tol) + ")",
        model);
}

Vector predict_linear(const LinearModel& m, const Matrix& X) {
    if (X.cols() != m.weights.size())
        throw ValidationError("predict_linear: expected " + std::to_string(m.weights.size()) +
                              " features, got " + std::to_string(X.cols()));
    return (X * m.weights).array() + m.bias;
}

double lasso_objective(const Matrix& X, const Vector& y, const LinearModel& m, double lambda) {
    Vector r = y - X * m.weights;
    r.array() -= m.bias;
    return r.squaredNorm() / static_cast<double>(X.rows()) +
           lambda * m.weights.array().abs().sum();
}

double ridge_objective(const Matrix& X, const Vector& y, const LinearModel& m, double lambda) {
    Vector r = y - X * m.weights;
    r.array() -= m.bias;
    return r.squaredNorm() / static_cast<double>(X.rows()) + lambda * m.weights.squaredNorm();
}

double lasso_full_shrinkage_lambda(const Matrix& X, const Vector& y) {
    check_design(X, y);
    Vector yc = y.array() - y.mean();
    return 2.0 * (X.transpose() * yc).array().abs().maxCoeff() /
           static_cast<double>(X.rows());
}

}  // namespace desalt
