#include "desalt/metrics.hpp"

#include <cmath>

namespace desalt {

namespace {

void check_lengths(const Vector& actual, const Vector& predicted) {
    if (actual.size() != predicted.size()) {
        throw ValidationError("metric input length mismatch: actual has " +
                              std::to_string(actual.size()) + " entries, predicted has " +
                              std::to_string(predicted.size()));
    }
    if (actual.size() == 0) {
        throw ValidationError("metric input is empty");
    }
}

}  // namespace

double r2(const Vector& actual, const Vector& predicted) {
    check_lengths(actual, predicted);
    if (actual.size() < 2) {
        throw ValidationError("r2 requires at least 2 points");
    }
    const double mean = actual.mean();
    const double ss_tot = (actual.array() - mean).square().sum();
    if (ss_tot == 0.0) {
        throw ValidationError("r2 undefined: actual values are constant");
    }
    const double ss_res = (actual - predicted).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

double mse(const Vector& actual, const Vector& predicted) {
    check_lengths(actual, predicted);
    return (actual - predicted).squaredNorm() / static_cast<double>(actual.size());
}

double mae(const Vector& actual, const Vector& predicted) {
    check_lengths(actual, predicted);
    return (actual - predicted).cwiseAbs().sum() / static_cast<double>(actual.size());
}

MetricTriple score_all(const Vector& actual, const Vector& predicted) {
    return MetricTriple{r2(actual, predicted), mae(actual, predicted), mse(actual, predicted)};
}

}  // namespace desalt
