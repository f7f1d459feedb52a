#pragma once

#include "desalt/dataset.hpp"
#include "desalt/model_config.hpp"

#include <vector>

namespace desalt {

/// The six benchmarked algorithms that ship tuned per-target presets,
/// in report order.
const std::vector<Algorithm>& preset_algorithms();

/// Tuned hyperparameters for (algorithm, target), selected on the CLI as
/// `--preset paper`. Throws for algorithms without a preset (plain, ridge,
/// gbm_regularized — the gbm presets already carry their regularization).
ModelConfig tuned_preset(Algorithm a, Target t);

/// Footnote attached to preset rows whose values include an assumption
/// rather than a tuned setting (the gbm learning rate).
const char* preset_note(Algorithm a);

}  // namespace desalt
