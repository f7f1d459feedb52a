#include "desalt/presets.hpp"

namespace desalt {

const std::vector<Algorithm>& preset_algorithms() {
    static const std::vector<Algorithm> algos = {Algorithm::lasso,  Algorithm::tree,
                                                 Algorithm::forest, Algorithm::gbm,
                                                 Algorithm::svr,    Algorithm::mlp};
    return algos;
}

ModelConfig tuned_preset(Algorithm a, Target t) {
    ModelConfig c = ModelConfig::make(a);
    switch (a) {
        case Algorithm::lasso:
            c.set("lambda", t == Target::porosity_after        ? 0.001
                            : t == Target::permeability_after ? 10.0
                                                              : 1.0);
            return c;
        case Algorithm::tree:
            c.set("max_depth", t == Target::porosity_after        ? 7.0
                               : t == Target::permeability_after ? 10.0
                                                                 : 9.0);
            return c;
        case Algorithm::forest:
            if (t == Target::porosity_after) {
                c.set("n_estimators", 150.0);
                c.set("max_depth", 8.0);
            } else if (t == Target::permeability_after) {
                c.set("n_estimators", 25.0);
                c.set("max_depth", 8.0);
            } else {
                c.set("n_estimators", 10.0);
                c.set("max_depth", 1.0);
            }
            return c;
        case Algorithm::gbm:
            // learning_rate is an assumption (see preset_note), not a tuned
            // value; everything else is the tuned setting.
            c.set("learning_rate", 0.01);
            if (t == Target::porosity_after) {
                c.set("n_estimators", 16000.0);
                c.set("max_depth", 2.0);
                c.set("subsample", 0.7);
                c.set("max_features", 0.9);
                c.set("reg_lambda", 0.001);
            } else if (t == Target::permeability_after) {
                c.set("n_estimators", 300.0);
                c.set("max_depth", 2.0);
                c.set("subsample", 0.8);
                c.set("max_features", 0.9);
                c.set("reg_lambda", 0.1);
            } else {
                c.set("n_estimators", 300.0);
                c.set("max_depth", 10.0);
                c.set("subsample", 0.95);
                c.set("max_features", 0.5);
                c.set("reg_lambda", 1e-5);
            }
            return c;
        case Algorithm::svr:
            if (t == Target::porosity_after) {
                c.set("gamma", 1e-4);
                c.set("c", 40000.0);
            } else if (t == Target::permeability_after) {
                c.set("gamma", 1e-4);
                c.set("c", 50000.0);
            } else {
                c.set("gamma", 0.1);
                c.set("c", 25.0);
            }
            return c;
        case Algorithm::mlp:
            if (t == Target::porosity_after) {
                c.set("hidden1", 2.0);
                c.set("hidden2", 4.0);
            } else if (t == Target::permeability_after) {
                c.set("hidden1", 77.0);
                c.set("hidden2", 102.0);
            } else {
                c.set("hidden1", 55.0);
                c.set("hidden2", 10.0);
                c.set("hidden3", 86.0);
            }
            return c;
        case Algorithm::plain:
        case Algorithm::ridge:
        case Algorithm::gbm_regularized:
            break;
    }
    throw ValidationError(std::string("no tuned preset exists for algorithm '") +
                          algorithm_name(a) + "'");
}

const char* preset_note(Algorithm a) {
    return a == Algorithm::gbm ? "assumed-lr" : "";
}

}  // namespace desalt
