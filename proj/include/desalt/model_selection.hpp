#pragma once

#include "desalt/common.hpp"
#include "desalt/dataset.hpp"
#include "desalt/model_config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace desalt {

/// Resampling plan: repeated random permutation splits with a fixed test
/// fraction, or k-fold (k = n is leave-one-out).
struct SplitPlan {
    enum class Kind { shuffle, kfold };
    Kind kind = Kind::shuffle;
    double test_fraction = 0.35;
    int repeats = 10;
    int k = 0;
    std::uint64_t seed = 42;

    static SplitPlan shuffle_plan(double test_fraction, int repeats, std::uint64_t seed);
    static SplitPlan kfold_plan(int k, std::uint64_t seed);
};

/// Index sets are emitted sorted ascending, so a fold's train matrix is
/// identical whether it came from k-fold or a leave-one-out loop.
struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

std::vector<Split> make_splits(Eigen::Index n, const SplitPlan& plan);

struct FoldScore {
    double r2 = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    /// False when the fold's test targets were constant and r2 undefined.
    bool r2_valid = true;
};

/// Mean and population standard deviation of each metric over folds.
/// r2 aggregates over valid folds only; the exclusion count is reported.
struct CvReport {
    double r2_mean = 0.0, r2_std = 0.0;
    double mae_mean = 0.0, mae_std = 0.0;
    double mse_mean = 0.0, mse_std = 0.0;
    std::vector<FoldScore> fold_scores;
    int r2_excluded = 0;
};

/// Instrumentation hook: records, per fold, the train indices and the
/// scaler fitted on them (when normalization is on), so tests can verify
/// no test-row statistics leak into preprocessing.
struct EvalTrace {
    std::vector<std::vector<Eigen::Index>> fold_train_indices;
    std::vector<std::optional<Scaler>> fold_scalers;
};

/// Cross-validates a model configuration: per fold, fit the scaler (when
/// configured) and model on train rows only, score the test rows. Fold fit
/// seeds derive from (plan.seed, fold index).
CvReport evaluate(const ModelConfig& config, const FeatureMatrix& fm, const SplitPlan& plan,
                  EvalTrace* trace = nullptr);

struct GridSpec {
    /// Axes in declaration order; each axis is (hyperparameter, candidates).
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    SplitPlan plan = SplitPlan::shuffle_plan(0.35, 10, 42);
};

/// `name = v1, v2, v3` per line; blank lines and #-comments skipped.
std::vector<std::pair<std::string, std::vector<double>>> parse_grid_axes(std::istream& in);
std::vector<std::pair<std::string, std::vector<double>>> load_grid_axes(
    const std::string& path);

enum class SelectionMetric { r2, mae, mse };

SelectionMetric selection_metric_from_name(std::string_view name);

struct GridPoint {
    ModelConfig config;
    CvReport report;
};

struct GridResult {
    ModelConfig best_config;
    CvReport best_report;
    std::vector<GridPoint> points;
};

/// Evaluates every Cartesian grid point in lexicographic order (first axis
/// most significant) and keeps the best mean score; ties keep the earliest
/// point. Points whose fits throw are skipped; if every point fails the
/// errors are aggregated and rethrown.
GridResult grid_search(const GridSpec& grid, const ModelConfig& base,
                       const FeatureMatrix& fm, SelectionMetric metric = SelectionMetric::r2);

/// For each row: fit on all other rows (rebuilding any scaler), predict the
/// held-out row. Fit seeds derive from (seed, row index).
Vector loo_predictions(const ModelConfig& config, const FeatureMatrix& fm,
                       std::uint64_t seed, EvalTrace* trace = nullptr);

}  // namespace desalt
