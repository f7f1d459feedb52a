#include "desalt/physics.hpp"

#include "desalt/linear_models.hpp"
#include "desalt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <string>

namespace desalt {

double porosity_after_desalination(double phi0_pct, double rho_r0_gcc, double c_salt_gg,
                                   const PhysicsParams& params) {
    if (!(params.salt_density_gcc > 0.0))
        throw ValidationError("salt density must be positive");
    if (!(phi0_pct > 0.0 && phi0_pct < 100.0))
        throw ValidationError("initial porosity must be in (0, 100) percent");
    if (!(rho_r0_gcc > 0.0)) throw ValidationError("initial density must be positive");
    if (!(c_salt_gg >= 0.0 && c_salt_gg < 1.0))
        throw ValidationError("salt concentration must be in [0, 1)");
    const double phi = phi0_pct + 100.0 * (rho_r0_gcc / params.salt_density_gcc) * c_salt_gg;
    if (phi > 100.0)
        throw ValidationError("porosity balance exceeds 100% (phi = " +
                              std::to_string(phi) + ")");
    if (phi < phi0_pct)
        throw ValidationError("porosity balance fell below the initial porosity");
    return phi;
}

CubicBaseline fit_cubic_baseline(const Vector& c_salt, const Vector& delta_target) {
    if (c_salt.size() != delta_target.size())
        throw ValidationError("abscissae and ordinates differ in length");
    std::set<double> distinct(c_salt.begin(), c_salt.end());
    if (distinct.size() < 4)
        throw ValidationError("cubic fit needs at least 4 distinct salt concentrations, got " +
                              std::to_string(distinct.size()));
    Matrix powers(c_salt.size(), 3);
    powers.col(0) = c_salt;
    powers.col(1) = c_salt.array().square();
    powers.col(2) = c_salt.array().cube();
    LinearModel m = fit_plain(powers, delta_target);
    CubicBaseline b;
    b.coefficients = {m.bias, m.weights(0), m.weights(1), m.weights(2)};
    return b;
}

double eval_cubic(const CubicBaseline& b, double c_salt) {
    const auto& c = b.coefficients;
    return c[0] + c_salt * (c[1] + c_salt * (c[2] + c_salt * c[3]));
}

Vector predict_cubic(const CubicBaseline& b, const Vector& c_salt,
                     const Vector& initial_values) {
    if (c_salt.size() != initial_values.size())
        throw ValidationError("salt and initial-value vectors differ in length");
    Vector out(c_salt.size());
    for (Eigen::Index i = 0; i < c_salt.size(); ++i)
        out(i) = initial_values(i) + eval_cubic(b, c_salt(i));
    return out;
}

double kozeny_permeability(double porosity_fraction, double scale_md) {
    if (!(porosity_fraction > 0.0 && porosity_fraction < 1.0))
        throw ValidationError("porosity fraction must be in (0, 1)");
    const double f = porosity_fraction;
    return scale_md * f * f * f / ((1.0 - f) * (1.0 - f));
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void check_range(double lo, double hi, const char* what) {
    if (!(lo <= hi)) fail(std::string(what) + " range is inverted");
    if (!std::isfinite(lo) || !std::isfinite(hi))
        fail(std::string(what) + " range must be finite");
}

void check_config(const SynthConfig& cfg) {
    if (cfg.n_samples < 1) fail("n_samples must be at least 1");
    if (!(cfg.noise_rel >= 0.0)) fail("noise_rel must be non-negative");
    const SynthRanges& r = cfg.ranges;
    check_range(r.formation_top_min_m, r.formation_top_max_m, "formation top");
    check_range(r.formation_thickness_min_m, r.formation_thickness_max_m,
                "formation thickness");
    check_range(r.porosity_initial_min_pct, r.porosity_initial_max_pct, "initial porosity");
    check_range(r.density_min_gcc, r.density_max_gcc, "density");
    check_range(r.grain_size_min_mm, r.grain_size_max_mm, "grain size");
    check_range(r.salt_min_gg, r.salt_max_gg, "salt concentration");
    if (!(r.formation_top_min_m > 0.0)) fail("formation top must be positive");
    if (!(r.formation_thickness_min_m > 0.0)) fail("formation thickness must be positive");
    if (!(r.porosity_initial_min_pct > 0.0 && r.porosity_initial_max_pct < 100.0))
        fail("initial porosity must stay in (0, 100) percent");
    if (!(r.density_min_gcc > 0.0)) fail("density must be positive");
    if (!(r.grain_size_min_mm > 0.0)) fail("grain size must be positive");
    if (!(r.salt_min_gg >= 0.0 && r.salt_max_gg < 1.0))
        fail("salt concentration must stay in [0, 1)");
    if (!(cfg.kc_scale_md > 0.0)) fail("kc_scale_md must be positive");
    if (!(cfg.ratio_cap >= 1.0)) fail("ratio_cap must be at least 1");
    if (cfg.max_attempts_per_sample < 1) fail("max_attempts_per_sample must be positive");
}

std::string sample_id_for(Eigen::Index index, Eigen::Index total) {
    int width = 1;
    for (Eigen::Index v = total; v >= 10; v /= 10) ++width;
    width = std::max(width, 3);
    std::string digits = std::to_string(index + 1);
    return "S" + std::string(static_cast<size_t>(width) - digits.size(), '0') + digits;
}

}  // namespace

Dataset generate_synthetic(const SynthConfig& cfg, const PhysicsParams& params) {
    check_config(cfg);
    if (!(params.salt_density_gcc > 0.0)) fail("salt density must be positive");
    const SynthRanges& r = cfg.ranges;
    const CategoryScheme& scheme = CategoryScheme::canonical();
    Rng rng(cfg.seed);

    const double log_grain_min = std::log(r.grain_size_min_mm);
    const double log_grain_max = std::log(r.grain_size_max_mm);

    Dataset ds;
    ds.provenance = "synthetic";
    ds.samples.reserve(static_cast<size_t>(cfg.n_samples));
    for (Eigen::Index i = 0; i < cfg.n_samples; ++i) {
        CoreSample s;
        bool accepted = false;
        for (int attempt = 0; attempt < cfg.max_attempts_per_sample; ++attempt) {
            s = CoreSample{};
            s.sample_id = sample_id_for(i, cfg.n_samples);
            s.formation_top_depth_m =
                rng.uniform(r.formation_top_min_m, r.formation_top_max_m);
            s.formation_bottom_depth_m =
                s.formation_top_depth_m +
                rng.uniform(r.formation_thickness_min_m, r.formation_thickness_max_m);
            s.sample_depth_m = rng.uniform(s.formation_top_depth_m, s.formation_bottom_depth_m);
            s.porosity_initial_pct =
                rng.uniform(r.porosity_initial_min_pct, r.porosity_initial_max_pct);
            s.density_initial_gcc = rng.uniform(r.density_min_gcc, r.density_max_gcc);
            s.grain_size_mm = std::exp(rng.uniform(log_grain_min, log_grain_max));
            s.color = scheme.colors[rng.below(scheme.colors.size())];
            s.horizon = scheme.horizons[rng.below(scheme.horizons.size())];

            // Salt concentration tracks grain size (coarser rocks hold more
            // connected salt-filled pores here) with a uniform admixture.
            double grain_norm =
                log_grain_max > log_grain_min
                    ? (std::log(s.grain_size_mm) - log_grain_min) /
                          (log_grain_max - log_grain_min)
                    : 0.5;
            double mix = 0.65 * grain_norm + 0.35 * rng.uniform();
            mix = std::clamp(mix, 0.0, 1.0);
            double c_salt = r.salt_min_gg + (r.salt_max_gg - r.salt_min_gg) * mix;

            double phi_pct;
            try {
                phi_pct = porosity_after_desalination(s.porosity_initial_pct,
                                                      s.density_initial_gcc, c_salt, params);
            } catch (const ValidationError&) {
                continue;
            }
            const double k0 =
                kozeny_permeability(s.porosity_initial_pct / 100.0, cfg.kc_scale_md);
            const double k_uncapped = kozeny_permeability(phi_pct / 100.0, cfg.kc_scale_md);
            const double k = std::min(k_uncapped, cfg.ratio_cap * k0);
            s.permeability_initial_md = k0;

            if (cfg.noise_rel > 0.0) {
                c_salt *= 1.0 + cfg.noise_rel * rng.normal();
                phi_pct *= 1.0 + cfg.noise_rel * rng.normal();
                s.salt_concentration_gg = c_salt;
                s.porosity_after_pct = phi_pct;
                s.permeability_after_md = k * (1.0 + cfg.noise_rel * rng.normal());
            } else {
                s.salt_concentration_gg = c_salt;
                s.porosity_after_pct = phi_pct;
                s.permeability_after_md = k;
            }

            try {
                validate_sample(s, scheme);
            } catch (const ValidationError&) {
                continue;
            }
            accepted = true;
            break;
        }
        if (!accepted)
            throw Error("sample " + std::to_string(i + 1) + " could not satisfy invariants in " +
                        std::to_string(cfg.max_attempts_per_sample) +
                        " attempts; widen the configured ranges");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

namespace {

double parse_number(std::string_view value, const std::string& key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        fail("config key '" + key + "' has non-numeric value '" + std::string(value) + "'");
    return v;
}

}  // namespace

SynthConfig parse_synth_config(std::istream& in) {
    SynthConfig cfg;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
            s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.remove_suffix(1);
        return s;
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        size_t eq = view.find('=');
        if (eq == std::string_view::npos)
            fail("config line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key(trim(view.substr(0, eq)));
        std::string value(trim(view.substr(eq + 1)));
        if (key == "seed") {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size())
                fail("config line " + std::to_string(line_no) + ": bad seed '" + value + "'");
            cfg.seed = v;
        } else if (key == "n_samples") {
            cfg.n_samples = static_cast<Eigen::Index>(parse_number(value, key));
        } else if (key == "noise_rel") cfg.noise_rel = parse_number(value, key);
        else if (key == "formation_top_min_m") cfg.ranges.formation_top_min_m = parse_number(value, key);
        else if (key == "formation_top_max_m") cfg.ranges.formation_top_max_m = parse_number(value, key);
        else if (key == "formation_thickness_min_m") cfg.ranges.formation_thickness_min_m = parse_number(value, key);
        else if (key == "formation_thickness_max_m") cfg.ranges.formation_thickness_max_m = parse_number(value, key);
        else if (key == "porosity_initial_min_pct") cfg.ranges.porosity_initial_min_pct = parse_number(value, key);
        else if (key == "porosity_initial_max_pct") cfg.ranges.porosity_initial_max_pct = parse_number(value, key);
        else if (key == "density_min_gcc") cfg.ranges.density_min_gcc = parse_number(value, key);
        else if (key == "density_max_gcc") cfg.ranges.density_max_gcc = parse_number(value, key);
        else if (key == "grain_size_min_mm") cfg.ranges.grain_size_min_mm = parse_number(value, key);
        else if (key == "grain_size_max_mm") cfg.ranges.grain_size_max_mm = parse_number(value, key);
        else if (key == "salt_min_gg") cfg.ranges.salt_min_gg = parse_number(value, key);
        else if (key == "salt_max_gg") cfg.ranges.salt_max_gg = parse_number(value, key);
        else if (key == "kc_scale_md") cfg.kc_scale_md = parse_number(value, key);
        else if (key == "ratio_cap") cfg.ratio_cap = parse_number(value, key);
        else if (key == "max_attempts_per_sample") cfg.max_attempts_per_sample = static_cast<int>(parse_number(value, key));
        else fail("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    try {
        return parse_synth_config(in);
    } catch (const ValidationError& e) {
        fail(path + ": " + e.what());
    }
}

}  // namespace desalt
