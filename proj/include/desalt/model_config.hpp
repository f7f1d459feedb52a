#pragma once

#include "desalt/common.hpp"
#include "desalt/dataset.hpp"
#include "desalt/linear_models.hpp"
#include "desalt/mlp.hpp"
#include "desalt/svr.hpp"
#include "desalt/tree_ensembles.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace desalt {

enum class Algorithm {
    plain,
    ridge,
    lasso,
    tree,
    forest,
    gbm,
    gbm_regularized,
    svr,
    mlp,
};

Algorithm algorithm_from_name(std::string_view name);
const char* algorithm_name(Algorithm a);

/// Algorithm tag plus a name->value hyperparameter map. Unset names fall
/// back to per-algorithm defaults; names foreign to the algorithm are
/// rejected. Feature normalization defaults on for svr and mlp only.
struct ModelConfig {
    Algorithm algorithm = Algorithm::plain;
    std::map<std::string, double> hyper;
    bool normalize_features = false;

    static ModelConfig make(Algorithm a);

    /// Set value or per-algorithm default. Throws on a name the algorithm
    /// does not recognize.
    double get(const std::string& name) const;
    int get_int(const std::string& name) const;

    void set(const std::string& name, double value);
    ModelConfig with(const std::string& name, double value) const;

    /// Throws ValidationError on any unknown hyperparameter name.
    void validate() const;
};

/// Hyperparameter names the algorithm accepts, with their defaults.
const std::map<std::string, double>& hyper_defaults(Algorithm a);

using AnyModel =
    std::variant<LinearModel, RegressionTree, ForestModel, GbmModel, SvrModel, MlpModel>;

/// Fits on X/y exactly as given; normalization is the pipeline's job.
AnyModel fit_model(const ModelConfig& config, const Matrix& X, const Vector& y,
                   std::uint64_t seed);

Vector predict_model(const AnyModel& model, const Matrix& X);

struct FittedPipeline {
    ModelConfig config;
    std::optional<Scaler> scaler;
    AnyModel model;
};

/// Fits the scaler (when configured) and the model on the same rows.
FittedPipeline fit_pipeline(const ModelConfig& config, const Matrix& X, const Vector& y,
                            std::uint64_t seed);

Vector predict_pipeline(const FittedPipeline& p, const Matrix& X);

}  // namespace desalt
