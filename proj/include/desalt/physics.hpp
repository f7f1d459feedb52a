#pragma once

#include "desalt/common.hpp"
#include "desalt/dataset.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace desalt {

struct PhysicsParams {
    /// Halite handbook value; configurable for other salt mixes.
    double salt_density_gcc = 2.165;
};

/// Material balance: dissolving a salt mass fraction c_salt from rock of
/// initial bulk density rho_r0 opens pore volume, so
/// phi = phi0 + (rho_r0 / rho_salt) * c_salt (phi as a fraction).
/// Arguments and result are in percent. Results above 100% raise an error
/// rather than clamping.
double porosity_after_desalination(double phi0_pct, double rho_r0_gcc, double c_salt_gg,
                                   const PhysicsParams& params = {});

/// delta_target = c0 + c1*C + c2*C^2 + c3*C^3.
struct CubicBaseline {
    std::array<double, 4> coefficients{};
};

/// Least-squares cubic in the salt concentration, solved by the stable
/// orthogonal decomposition. Needs at least 4 distinct abscissae.
CubicBaseline fit_cubic_baseline(const Vector& c_salt, const Vector& delta_target);

double eval_cubic(const CubicBaseline& b, double c_salt);

/// initial + polynomial(C), elementwise.
Vector predict_cubic(const CubicBaseline& b, const Vector& c_salt,
                     const Vector& initial_values);

struct SynthRanges {
    double formation_top_min_m = 1400.0;
    double formation_top_max_m = 1700.0;
    double formation_thickness_min_m = 20.0;
    double formation_thickness_max_m = 120.0;
    double porosity_initial_min_pct = 1.0;
    double porosity_initial_max_pct = 8.0;
    /// Kept narrow by default so the porosity balance stays nearly affine
    /// in (phi0, c_salt) across the dataset.
    double density_min_gcc = 2.36;
    double density_max_gcc = 2.44;
    double grain_size_min_mm = 0.005;
    double grain_size_max_mm = 1.0;
    double salt_min_gg = 0.04;
    double salt_max_gg = 0.30;
};

struct SynthConfig {
    Eigen::Index n_samples = 102;
    /// Relative magnitude of the multiplicative Gaussian noise applied to
    /// the three measured targets. Features are left exact.
    double noise_rel = 0.0;
    std::uint64_t seed = 42;
    SynthRanges ranges;
    /// Scale of the porosity-permeability power law K = scale * f^3/(1-f)^2.
    double kc_scale_md = 1e6;
    /// Post-desalination permeability is capped at this multiple of K0.
    double ratio_cap = 60.0;
    int max_attempts_per_sample = 1000;
};

/// `key = value` lines; blank lines and #-comments skipped; unknown keys
/// rejected. Keys mirror the SynthConfig field names.
SynthConfig parse_synth_config(std::istream& in);
SynthConfig load_synth_config(const std::string& path);

/// Porosity-permeability power law used by the generator.
double kozeny_permeability(double porosity_fraction, double scale_md);

/// Deterministic physics-consistent dataset: every row satisfies the
/// porosity balance exactly before noise, K0 follows the power law from
/// phi0, K applies the same law to the post-desalination porosity capped
/// at ratio_cap * K0, and the salt concentration correlates positively
/// with grain size. Rows violating sample invariants after noise are
/// redrawn from the same stream.
Dataset generate_synthetic(const SynthConfig& cfg, const PhysicsParams& params = {});

}  // namespace desalt
