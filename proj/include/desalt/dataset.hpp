#pragma once

#include "desalt/common.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace desalt {

/// One core plug: the routine-core-analysis features plus the three
/// optional lab-measured targets. Porosities are stored in percent,
/// permeabilities in millidarcy, salt concentration as a mass fraction.
struct CoreSample {
    std::string sample_id;
    double sample_depth_m = 0.0;
    double formation_top_depth_m = 0.0;
    double formation_bottom_depth_m = 0.0;
    double porosity_initial_pct = 0.0;
    double permeability_initial_md = 0.0;
    double density_initial_gcc = 0.0;
    double grain_size_mm = 0.0;
    std::string color;
    std::string horizon;
    std::optional<double> salt_concentration_gg;
    std::optional<double> porosity_after_pct;
    std::optional<double> permeability_after_md;
};

/// The recognized categorical labels. The label text is opaque to the
/// encoding; only the slot positions matter.
struct CategoryScheme {
    std::vector<std::string> colors;
    std::vector<std::string> horizons;

    /// Default scheme: 6 colors, 3 horizons.
    static const CategoryScheme& canonical();

    /// Slot index of a label, or -1 when unknown. Case-sensitive.
    int color_slot(std::string_view label) const;
    int horizon_slot(std::string_view label) const;
};

struct Dataset {
    std::vector<CoreSample> samples;
    std::string provenance;
};

/// Throws ValidationError describing the first violated field constraint.
void validate_sample(const CoreSample& s, const CategoryScheme& scheme = CategoryScheme::canonical());

/// Validates every sample plus dataset-level invariants (unique ids).
void validate_dataset(const Dataset& ds, const CategoryScheme& scheme = CategoryScheme::canonical());

/// Average grain size in millimeters for a textual lithology term.
/// Case-insensitive. Throws ValidationError listing the accepted terms.
double grain_size_from_lithology(std::string_view term);

/// Salt mass fraction from oven-dry sample masses before/after ablation.
double salt_concentration_from_masses(double mass_before_g, double mass_after_g);

enum class Target { porosity_after, permeability_after, salt_concentration };

Target target_from_name(std::string_view name);
const char* target_name(Target t);
/// CSV column that stores this target.
const char* target_column(Target t);

/// Ordered column names of the encoded design matrix. Numeric block first
/// (salt concentration leads when included), then the color indicators,
/// then the horizon indicators.
struct FeatureSchema {
    std::vector<std::string> column_names;
    bool include_salt = false;

    static FeatureSchema make(bool include_salt,
                              const CategoryScheme& scheme = CategoryScheme::canonical());
    Eigen::Index width() const { return static_cast<Eigen::Index>(column_names.size()); }
};

struct FeatureMatrix {
    FeatureSchema schema;
    Matrix rows;
    std::optional<Vector> targets;
    std::string target_name;
};

/// Numeric design matrix for a dataset; row order follows the dataset.
FeatureMatrix encode_features(const Dataset& ds, bool include_salt,
                              const CategoryScheme& scheme = CategoryScheme::canonical());

/// Target column as a vector. Throws if any sample lacks the value.
Vector target_vector(const Dataset& ds, Target t);

/// encode_features + target in one step. Salt concentration is included
/// as a feature except when it is itself the target, unless overridden.
FeatureMatrix build_matrix(const Dataset& ds, Target t,
                           std::optional<bool> include_salt = std::nullopt,
                           const CategoryScheme& scheme = CategoryScheme::canonical());

/// Per-column centering/scaling statistics. Population standard deviation;
/// zero-variance columns record a std of 1 so they scale to a constant 0.
struct Scaler {
    Vector means;
    Vector stds;
};

/// Fits on the given rows only (callers are responsible for passing
/// training rows, never test rows). Requires at least 2 rows.
Scaler fit_scaler(const Matrix& rows);

Matrix apply_scaler(const Scaler& s, const Matrix& rows);

/// CSV ingestion. One header row with the canonical column names; the
/// three target columns are optional but must be fully populated when
/// present. Exactly one of grain_size_mm / lithology_term must appear.
/// Errors carry the 1-based file line number.
Dataset parse_csv(std::istream& in, std::string provenance = "csv",
                  const CategoryScheme& scheme = CategoryScheme::canonical());

Dataset load_csv(const std::string& path,
                 const CategoryScheme& scheme = CategoryScheme::canonical());

/// Writes the canonical CSV form. Numbers are printed with the shortest
/// representation that parses back to the identical double.
void write_csv(std::ostream& out, const Dataset& ds);

void save_csv(const std::string& path, const Dataset& ds);

/// Shortest round-trip decimal form of a double (used by every CSV emitter).
std::string format_double(double v);

}  // namespace desalt
