#include "desalt/model_config.hpp"

#include <cmath>

namespace desalt {

Algorithm algorithm_from_name(std::string_view name) {
    if (name == "plain") return Algorithm::plain;
    if (name == "ridge") return Algorithm::ridge;
    if (name == "lasso") return Algorithm::lasso;
    if (name == "tree") return Algorithm::tree;
    if (name == "forest") return Algorithm::forest;
    if (name == "gbm") return Algorithm::gbm;
    if (name == "gbm_regularized") return Algorithm::gbm_regularized;
    if (name == "svr") return Algorithm::svr;
    if (name == "mlp") return Algorithm::mlp;
    throw ValidationError("unknown algorithm '" + std::string(name) +
                          "'; expected one of plain, ridge, lasso, tree, forest, gbm, "
                          "gbm_regularized, svr, mlp");
}

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::plain: return "plain";
        case Algorithm::ridge: return "ridge";
        case Algorithm::lasso: return "lasso";
        case Algorithm::tree: return "tree";
        case Algorithm::forest: return "forest";
        case Algorithm::gbm: return "gbm";
        case Algorithm::gbm_regularized: return "gbm_regularized";
        case Algorithm::svr: return "svr";
        case Algorithm::mlp: return "mlp";
    }
    throw ValidationError("invalid algorithm tag");
}

const std::map<std::string, double>& hyper_defaults(Algorithm a) {
    static const std::map<std::string, double> none;
    static const std::map<std::string, double> penalized = {{"lambda", 1.0}};
    static const std::map<std::string, double> tree = {{"max_depth", 5.0},
                                                       {"min_samples_leaf", 1.0}};
    static const std::map<std::string, double> forest = {
        {"n_estimators", 100.0}, {"max_depth", 5.0}, {"min_samples_leaf", 1.0}};
    static const std::map<std::string, double> gbm = {
        {"n_estimators", 100.0}, {"max_depth", 3.0},    {"learning_rate", 0.01},
        {"subsample", 1.0},      {"max_features", 1.0}, {"reg_lambda", 0.0}};
    static const std::map<std::string, double> gbm_reg = {
        {"n_estimators", 100.0}, {"max_depth", 3.0},    {"learning_rate", 0.01},
        {"subsample", 1.0},      {"max_features", 1.0}, {"reg_lambda", 0.001}};
    static const std::map<std::string, double> svr = {
        {"c", 1.0}, {"gamma", 1.0}, {"epsilon", 0.1}, {"tol", 1e-3}};
    static const std::map<std::string, double> mlp = {
        {"hidden1", 8.0},       {"hidden2", 0.0},     {"hidden3", 0.0},
        {"learning_rate", 1e-3}, {"max_epochs", 1000.0}, {"batch_size", 0.0},
        {"tolerance", 1e-8}};
    switch (a) {
        case Algorithm::plain: return none;
        case Algorithm::ridge:
        case Algorithm::lasso: return penalized;
        case Algorithm::tree: return tree;
        case Algorithm::forest: return forest;
        case Algorithm::gbm: return gbm;
        case Algorithm::gbm_regularized: return gbm_reg;
        case Algorithm::svr: return svr;
        case Algorithm::mlp: return mlp;
    }
    throw ValidationError("invalid algorithm tag");
}

ModelConfig ModelConfig::make(Algorithm a) {
    ModelConfig c;
    c.algorithm = a;
    c.normalize_features = (a == Algorithm::svr || a == Algorithm::mlp);
    return c;
}

double ModelConfig::get(const std::string& name) const {
    const auto& defaults = hyper_defaults(algorithm);
    auto def = defaults.find(name);
    if (def == defaults.end())
        throw ValidationError(std::string(algorithm_name(algorithm)) +
                              " has no hyperparameter '" + name + "'");
    auto it = hyper.find(name);
    return it != hyper.end() ? it->second : def->second;
}

int ModelConfig::get_int(const std::string& name) const {
    return static_cast<int>(std::lround(get(name)));
}

void ModelConfig::set(const std::string& name, double value) {
    if (!hyper_defaults(algorithm).count(name))
        throw ValidationError(std::string(algorithm_name(algorithm)) +
                              " has no hyperparameter '" + name + "'");
    hyper[name] = value;
}

ModelConfig ModelConfig::with(const std::string& name, double value) const {
    ModelConfig copy = *this;
    copy.set(name, value);
    return copy;
}

void ModelConfig::validate() const {
    const auto& defaults = hyper_defaults(algorithm);
    for (const auto& [name, value] : hyper) {
        (void)value;
        if (!defaults.count(name))
            throw ValidationError(std::string(algorithm_name(algorithm)) +
                                  " has no hyperparameter '" + name + "'");
    }
}

AnyModel fit_model(const ModelConfig& config, const Matrix& X, const Vector& y,
                   std::uint64_t seed) {
    config.validate();
    switch (config.algorithm) {
        case Algorithm::plain: return fit_plain(X, y);
        case Algorithm::ridge: return fit_ridge(X, y, config.get("lambda"));
        case Algorithm::lasso: return fit_lasso(X, y, config.get("lambda"));
        case Algorithm::tree:
            return fit_tree(X, y, config.get_int("max_depth"),
                            config.get_int("min_samples_leaf"));
        case Algorithm::forest:
            return fit_forest(X, y, config.get_int("n_estimators"),
                              config.get_int("max_depth"), seed,
                              config.get_int("min_samples_leaf"));
        case Algorithm::gbm:
        case Algorithm::gbm_regularized:
            return fit_gbm(X, y, config.get_int("n_estimators"),
                           config.get_int("max_depth"), config.get("learning_rate"),
                           config.get("subsample"), config.get("max_features"),
                           config.get("reg_lambda"), seed);
        case Algorithm::svr: {
            SvrParams params;
            params.C = config.get("c");
            params.gamma = config.get("gamma");
            params.epsilon = config.get("epsilon");
            params.tol = config.get("tol");
            return fit_svr(X, y, params);
        }
        case Algorithm::mlp: {
            std::vector<int> hidden;
            for (const char* name : {"hidden1", "hidden2", "hidden3"}) {
                int h = config.get_int(name);
                if (h > 0) hidden.push_back(h);
            }
            TrainConfig tc;
            tc.learning_rate = config.get("learning_rate");
            tc.max_epochs = config.get_int("max_epochs");
            tc.batch_size = config.get_int("batch_size");
            tc.tolerance = config.get("tolerance");
            return fit_mlp(X, y, hidden, tc, seed);
        }
    }
    throw ValidationError("invalid algorithm tag");
}

Vector predict_model(const AnyModel& model, const Matrix& X) {
    return std::visit(
        [&](const auto& m) -> Vector {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) return predict_linear(m, X);
            else if constexpr (std::is_same_v<T, RegressionTree>) return predict_tree(m, X);
            else if constexpr (std::is_same_v<T, ForestModel>) return predict_forest(m, X);
            else if constexpr (std::is_same_v<T, GbmModel>) return predict_gbm(m, X);
            else if constexpr (std::is_same_v<T, SvrModel>) return predict_svr(m, X);
            else return mlp_forward(m, X);
        },
        model);
}

FittedPipeline fit_pipeline(const ModelConfig& config, const Matrix& X, const Vector& y,
                            std::uint64_t seed) {
    FittedPipeline p;
    p.config = config;
    if (config.normalize_features) {
        p.scaler = fit_scaler(X);
        p.model = fit_model(config, apply_scaler(*p.scaler, X), y, seed);
    } else {
        p.model = fit_model(config, X, y, seed);
    }
    return p;
}

Vector predict_pipeline(const FittedPipeline& p, const Matrix& X) {
    return predict_model(p.model, p.scaler ? apply_scaler(*p.scaler, X) : X);
}

}  // namespace desalt
