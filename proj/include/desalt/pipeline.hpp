#pragma once

#include "desalt/common.hpp"
#include "desalt/dataset.hpp"
#include "desalt/metrics.hpp"
#include "desalt/model_selection.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace desalt {

/// Two-stage prediction: stage 1 predicts the salt concentration from the
/// plain feature encoding, stage 2 injects the predicted salts as the
/// leading feature column and predicts the target.
struct ChainPrediction {
    Vector salt_predicted;
    Vector target_predicted;
    /// Stage-1 predictions below 0 are floored at 0; this counts them.
    int negative_salt_floored = 0;
};

/// Fits both stages on `train` (which must carry measured salts and the
/// target) and predicts every row of `data` (features only).
ChainPrediction chain_predict(const Dataset& train, const Dataset& data, Target target,
                              const ModelConfig& salt_model, const ModelConfig& target_model,
                              std::uint64_t seed);

/// Evaluation mode on one fully measured dataset: both stages run
/// leave-one-out, so no sample's own measurements reach its prediction.
/// With stage-1 predictions equal to the measured salts, stage 2 is
/// computation-identical to loo_predictions of the target model.
ChainPrediction chain_predict_loo(const Dataset& ds, Target target,
                                  const ModelConfig& salt_model,
                                  const ModelConfig& target_model, std::uint64_t seed);

struct ModelEntry {
    std::string name;
    ModelConfig config;
    std::string note;
};

struct BenchmarkRow {
    std::string name;
    ModelConfig config;
    bool ok = false;
    std::string error;
    CvReport report;
    std::string note;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
};

/// One cross-validated row per model, all rows scored on the identical
/// split sequence. A row that fails to fit reports its error and leaves
/// the other rows intact.
BenchmarkReport run_benchmark(const FeatureMatrix& fm, const std::vector<ModelEntry>& models,
                              const SplitPlan& plan);

struct ApproachScores {
    MetricTriple ml_salt_known;
    MetricTriple ml_salt_predicted;
    MetricTriple one_feature_cubic;
};

struct ComparisonReport {
    std::vector<std::pair<Target, ApproachScores>> per_target;
    int negative_salt_floored = 0;
};

/// Leave-one-out scores of three routes to each target: the model with
/// measured salts, the chained model with predicted salts, and the cubic
/// one-feature baseline on the target alteration vs salt concentration.
ComparisonReport compare_approaches(const Dataset& ds, const std::vector<Target>& targets,
                                    const ModelConfig& salt_model,
                                    const ModelConfig& target_model, std::uint64_t seed);

/// Aligned-text and CSV forms of the reports. R2 is printed to 3 decimals
/// and MAE/MSE to 3 significant digits in the text tables; CSV carries
/// full precision.
std::string benchmark_table(const BenchmarkReport& report);
std::string benchmark_csv(const BenchmarkReport& report);
std::string comparison_table(const ComparisonReport& report);
std::string comparison_csv(const ComparisonReport& report);

std::string format_fixed3(double v);
std::string format_sig3(double v);

/// Pads every cell to its column width; two spaces between columns.
std::string render_table(const std::vector<std::vector<std::string>>& rows);

}  // namespace desalt
