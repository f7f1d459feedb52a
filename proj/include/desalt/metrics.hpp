#pragma once

#include "desalt/common.hpp"

namespace desalt {

/// The three scores reported for every evaluated model.
struct MetricTriple {
    double r2 = 0.0;
    double mae = 0.0;
    double mse = 0.0;
};

/// Coefficient of determination: 1 - SS_res / SS_tot.
/// Throws ValidationError on length mismatch, fewer than 2 points, or a
/// constant actual vector (zero total variance).
double r2(const Vector& actual, const Vector& predicted);

/// Mean squared error. Throws on length mismatch or empty input.
double mse(const Vector& actual, const Vector& predicted);

/// Mean absolute error. Throws on length mismatch or empty input.
double mae(const Vector& actual, const Vector& predicted);

/// Convenience bundle of all three metrics.
MetricTriple score_all(const Vector& actual, const Vector& predicted);

}  // namespace desalt
