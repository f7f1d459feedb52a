#include "desalt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace desalt {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

}  // namespace

const CategoryScheme& CategoryScheme::canonical() {
    static const CategoryScheme scheme{
        {"gray", "light-gray", "brown", "red", "green", "mottled"},
        {"talakh", "khamakin", "botuobinsk"}};
    return scheme;
}

int CategoryScheme::color_slot(std::string_view label) const {
    for (size_t i = 0; i < colors.size(); ++i)
        if (colors[i] == label) return static_cast<int>(i);
    return -1;
}

int CategoryScheme::horizon_slot(std::string_view label) const {
    for (size_t i = 0; i < horizons.size(); ++i)
        if (horizons[i] == label) return static_cast<int>(i);
    return -1;
}

void validate_sample(const CoreSample& s, const CategoryScheme& scheme) {
    const std::string who = "sample '" + s.sample_id + "': ";
    require(!s.sample_id.empty(), "sample_id must be non-empty");
    require(std::isfinite(s.sample_depth_m) && s.sample_depth_m > 0.0,
            who + "sample_depth_m must be positive");
    require(std::isfinite(s.formation_top_depth_m) && s.formation_top_depth_m > 0.0,
            who + "formation_top_depth_m must be positive");
    require(std::isfinite(s.formation_bottom_depth_m) &&
                s.formation_bottom_depth_m > s.formation_top_depth_m,
            who + "formation_bottom_depth_m must exceed formation_top_depth_m");
    require(s.sample_depth_m >= s.formation_top_depth_m &&
                s.sample_depth_m <= s.formation_bottom_depth_m,
            who + "sample_depth_m must lie within the formation interval");
    require(std::isfinite(s.porosity_initial_pct) && s.porosity_initial_pct > 0.0 &&
                s.porosity_initial_pct < 100.0,
            who + "porosity_initial_pct must be in (0, 100)");
    require(std::isfinite(s.permeability_initial_md) && s.permeability_initial_md > 0.0,
            who + "permeability_initial_md must be positive");
    require(std::isfinite(s.density_initial_gcc) && s.density_initial_gcc > 0.0,
            who + "density_initial_gcc must be positive");
    require(std::isfinite(s.grain_size_mm) && s.grain_size_mm >= 0.005 &&
                s.grain_size_mm <= 1.0,
            who + "grain_size_mm must be in [0.005, 1], the lexicon's range");
    require(scheme.color_slot(s.color) >= 0, who + "unknown color '" + s.color + "'");
    require(scheme.horizon_slot(s.horizon) >= 0, who + "unknown horizon '" + s.horizon + "'");
    if (s.salt_concentration_gg) {
        double c = *s.salt_concentration_gg;
        require(std::isfinite(c) && c >= 0.0 && c < 1.0,
                who + "salt_concentration_gg must be in [0, 1)");
    }
    if (s.porosity_after_pct) {
        double p = *s.porosity_after_pct;
        require(std::isfinite(p) && p > 0.0 && p < 100.0,
                who + "porosity_after_pct must be in (0, 100)");
        require(p >= s.porosity_initial_pct,
                who + "porosity_after_pct must not fall below porosity_initial_pct");
    }
    if (s.permeability_after_md) {
        double k = *s.permeability_after_md;
        require(std::isfinite(k) && k >= s.permeability_initial_md,
                who + "permeability_after_md must be at least permeability_initial_md");
    }
}

void validate_dataset(const Dataset& ds, const CategoryScheme& scheme) {
    require(!ds.samples.empty(), "dataset has no samples");
    std::unordered_set<std::string> ids;
    for (const CoreSample& s : ds.samples) {
        validate_sample(s, scheme);
        if (!ids.insert(s.sample_id).second)
            fail("duplicate sample_id '" + s.sample_id + "'");
    }
}

double grain_size_from_lithology(std::string_view term) {
    static const std::map<std::string, double> lexicon = {
        {"gravel", 1.0},      {"coarse sand", 0.5}, {"medium sand", 0.25},
        {"fine sand", 0.1},   {"coarse silt", 0.05}, {"fine silt", 0.01},
        {"clay", 0.005}};
    auto it = lexicon.find(lower(trim(term)));
    if (it == lexicon.end()) {
        std::string msg = "unknown lithology term '" + std::string(term) + "'; expected one of:";
        for (const auto& [name, mm] : lexicon) msg += " '" + name + "'";
        fail(msg);
    }
    return it->second;
}

double salt_concentration_from_masses(double mass_before_g, double mass_after_g) {
    require(std::isfinite(mass_before_g) && mass_before_g > 0.0,
            "mass before desalination must be positive");
    require(std::isfinite(mass_after_g) && mass_after_g > 0.0,
            "mass after desalination must be positive");
    require(mass_after_g <= mass_before_g,
            "mass after desalination cannot exceed mass before");
    return (mass_before_g - mass_after_g) / mass_before_g;
}

Target target_from_name(std::string_view name) {
    if (name == "porosity" || name == "porosity_after") return Target::porosity_after;
    if (name == "permeability" || name == "permeability_after")
        return Target::permeability_after;
    if (name == "salt" || name == "salt_concentration") return Target::salt_concentration;
    fail("unknown target '" + std::string(name) +
         "'; expected porosity_after, permeability_after, or salt_concentration");
}

const char* target_name(Target t) {
    switch (t) {
        case Target::porosity_after: return "porosity";
        case Target::permeability_after: return "permeability";
        case Target::salt_concentration: return "salt";
    }
    fail("invalid target");
}

const char* target_column(Target t) {
    switch (t) {
        case Target::porosity_after: return "porosity_after_pct";
        case Target::permeability_after: return "permeability_after_md";
        case Target::salt_concentration: return "salt_concentration_gg";
    }
    fail("invalid target");
}

FeatureSchema FeatureSchema::make(bool include_salt, const CategoryScheme& scheme) {
    FeatureSchema schema;
    schema.include_salt = include_salt;
    if (include_salt) schema.column_names.push_back("salt_concentration_gg");
    schema.column_names.insert(schema.column_names.end(),
                               {"formation_top_depth_m", "formation_bottom_depth_m",
                                "porosity_initial_pct", "permeability_initial_md",
                                "sample_depth_m", "density_initial_gcc", "grain_size_mm"});
    for (const std::string& c : scheme.colors) schema.column_names.push_back("color_" + c);
    for (const std::string& h : scheme.horizons) schema.column_names.push_back("horizon_" + h);
    return schema;
}

FeatureMatrix encode_features(const Dataset& ds, bool include_salt, const CategoryScheme& scheme) {
    validate_dataset(ds, scheme);
    FeatureMatrix fm;
    fm.schema = FeatureSchema::make(include_salt, scheme);
    const Eigen::Index n = static_cast<Eigen::Index>(ds.samples.size());
    fm.rows = Matrix::Zero(n, fm.schema.width());
    for (Eigen::Index i = 0; i < n; ++i) {
        const CoreSample& s = ds.samples[static_cast<size_t>(i)];
        Eigen::Index col = 0;
        if (include_salt) {
            if (!s.salt_concentration_gg)
                fail("sample '" + s.sample_id +
                     "': salt_concentration_gg required to encode it as a feature");
            fm.rows(i, col++) = *s.salt_concentration_gg;
        }
        fm.rows(i, col++) = s.formation_top_depth_m;
        fm.rows(i, col++) = s.formation_bottom_depth_m;
        fm.rows(i, col++) = s.porosity_initial_pct;
        fm.rows(i, col++) = s.permeability_initial_md;
        fm.rows(i, col++) = s.sample_depth_m;
        fm.rows(i, col++) = s.density_initial_gcc;
        fm.rows(i, col++) = s.grain_size_mm;
        fm.rows(i, col + scheme.color_slot(s.color)) = 1.0;
        col += static_cast<Eigen::Index>(scheme.colors.size());
        fm.rows(i, col + scheme.horizon_slot(s.horizon)) = 1.0;
    }
    return fm;
}

Vector target_vector(const Dataset& ds, Target t) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.samples.size());
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const CoreSample& s = ds.samples[static_cast<size_t>(i)];
        std::optional<double> v;
        switch (t) {
            case Target::porosity_after: v = s.porosity_after_pct; break;
            case Target::permeability_after: v = s.permeability_after_md; break;
            case Target::salt_concentration: v = s.salt_concentration_gg; break;
        }
        if (!v)
            fail("sample '" + s.sample_id + "': missing " + std::string(target_column(t)));
        y(i) = *v;
    }
    return y;
}

FeatureMatrix build_matrix(const Dataset& ds, Target t, std::optional<bool> include_salt,
                           const CategoryScheme& scheme) {
    bool with_salt = include_salt.value_or(t != Target::salt_concentration);
    if (with_salt && t == Target::salt_concentration)
        fail("salt concentration cannot be both a feature and the target");
    FeatureMatrix fm = encode_features(ds, with_salt, scheme);
    fm.targets = target_vector(ds, t);
    fm.target_name = target_name(t);
    return fm;
}

Scaler fit_scaler(const Matrix& rows) {
    require(rows.rows() >= 2, "scaler needs at least 2 rows");
    Scaler s;
    const double n = static_cast<double>(rows.rows());
    s.means = rows.colwise().mean();
    s.stds = Vector(rows.cols());
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        double var = (rows.col(j).array() - s.means(j)).square().sum() / n;
        double sd = std::sqrt(var);
        s.stds(j) = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix apply_scaler(const Scaler& s, const Matrix& rows) {
    require(rows.cols() == s.means.size(), "scaler width does not match matrix width");
    return (rows.rowwise() - s.means.transpose()).array().rowwise() /
           s.stds.transpose().array();
}

namespace {

double parse_double_field(std::string_view field, int line, const std::string& column) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        fail("line " + std::to_string(line) + ": column '" + column +
             "' has non-numeric value '" + std::string(field) + "'");
    return value;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.emplace_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

const std::vector<std::string> kRequiredColumns = {
    "sample_id",         "sample_depth_m",          "formation_top_depth_m",
    "formation_bottom_depth_m", "porosity_initial_pct", "permeability_initial_md",
    "density_initial_gcc", "color",                 "horizon"};

const std::vector<std::string> kOptionalColumns = {
    "salt_concentration_gg", "porosity_after_pct", "permeability_after_md"};

}  // namespace

Dataset parse_csv(std::istream& in, std::string provenance, const CategoryScheme& scheme) {
    std::string line;
    if (!std::getline(in, line)) fail("line 1: missing header row");
    std::vector<std::string> header = split_line(line);
    std::unordered_map<std::string, int> pos;
    for (size_t j = 0; j < header.size(); ++j) {
        if (header[j].empty()) fail("line 1: empty header column name");
        if (!pos.emplace(header[j], static_cast<int>(j)).second)
            fail("line 1: duplicate column '" + header[j] + "'");
    }
    std::unordered_set<std::string> known;
    for (const std::string& c : kRequiredColumns) {
        known.insert(c);
        if (!pos.count(c)) fail("line 1: missing required column '" + c + "'");
    }
    known.insert("grain_size_mm");
    known.insert("lithology_term");
    for (const std::string& c : kOptionalColumns) known.insert(c);
    for (const std::string& c : header)
        if (!known.count(c)) fail("line 1: unknown column '" + c + "'");
    const bool has_grain = pos.count("grain_size_mm") > 0;
    const bool has_lith = pos.count("lithology_term") > 0;
    if (has_grain == has_lith)
        fail("line 1: exactly one of 'grain_size_mm' or 'lithology_term' must be present");

    Dataset ds;
    ds.provenance = std::move(provenance);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size())
            fail("line " + std::to_string(line_no) + ": expected " +
                 std::to_string(header.size()) + " fields, got " +
                 std::to_string(fields.size()));
        auto field = [&](const std::string& col) -> const std::string& {
            return fields[static_cast<size_t>(pos.at(col))];
        };
        auto num = [&](const std::string& col) {
            return parse_double_field(field(col), line_no, col);
        };
        CoreSample s;
        s.sample_id = field("sample_id");
        if (s.sample_id.empty())
            fail("line " + std::to_string(line_no) + ": empty sample_id");
        s.sample_depth_m = num("sample_depth_m");
        s.formation_top_depth_m = num("formation_top_depth_m");
        s.formation_bottom_depth_m = num("formation_bottom_depth_m");
        s.porosity_initial_pct = num("porosity_initial_pct");
        s.permeability_initial_md = num("permeability_initial_md");
        s.density_initial_gcc = num("density_initial_gcc");
        s.grain_size_mm = has_grain ? num("grain_size_mm")
                                    : grain_size_from_lithology(field("lithology_term"));
        s.color = field("color");
        s.horizon = field("horizon");
        for (const std::string& c : kOptionalColumns) {
            if (!pos.count(c)) continue;
            if (field(c).empty())
                fail("line " + std::to_string(line_no) + ": column '" + c +
                     "' is present but empty; optional columns must be fully populated");
            double v = num(c);
            if (c == "salt_concentration_gg") s.salt_concentration_gg = v;
            else if (c == "porosity_after_pct") s.porosity_after_pct = v;
            else s.permeability_after_md = v;
        }
        try {
            validate_sample(s, scheme);
        } catch (const ValidationError& e) {
            fail("line " + std::to_string(line_no) + ": " + e.what());
        }
        ds.samples.push_back(std::move(s));
    }
    validate_dataset(ds, scheme);
    return ds;
}

Dataset load_csv(const std::string& path, const CategoryScheme& scheme) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    try {
        return parse_csv(in, path, scheme);
    } catch (const ValidationError& e) {
        fail(path + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    require(ec == std::errc(), "double formatting failed");
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& ds) {
    validate_dataset(ds);
    bool with[3];
    for (size_t k = 0; k < 3; ++k) {
        auto has = [&](const CoreSample& s) {
            return k == 0 ? s.salt_concentration_gg.has_value()
                 : k == 1 ? s.porosity_after_pct.has_value()
                          : s.permeability_after_md.has_value();
        };
        with[k] = has(ds.samples.front());
        for (const CoreSample& s : ds.samples)
            if (has(s) != with[k])
                fail("column '" + kOptionalColumns[k] +
                     "' is present on some samples but not all");
    }
    out << "sample_id,sample_depth_m,formation_top_depth_m,formation_bottom_depth_m,"
           "porosity_initial_pct,permeability_initial_md,density_initial_gcc,grain_size_mm,"
           "color,horizon";
    for (size_t k = 0; k < 3; ++k)
        if (with[k]) out << ',' << kOptionalColumns[k];
    out << '\n';
    for (const CoreSample& s : ds.samples) {
        out << s.sample_id << ',' << format_double(s.sample_depth_m) << ','
            << format_double(s.formation_top_depth_m) << ','
            << format_double(s.formation_bottom_depth_m) << ','
            << format_double(s.porosity_initial_pct) << ','
            << format_double(s.permeability_initial_md) << ','
            << format_double(s.density_initial_gcc) << ','
            << format_double(s.grain_size_mm) << ',' << s.color << ',' << s.horizon;
        if (with[0]) out << ',' << format_double(*s.salt_concentration_gg);
        if (with[1]) out << ',' << format_double(*s.porosity_after_pct);
        if (with[2]) out << ',' << format_double(*s.permeability_after_md);
        out << '\n';
    }
}

void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) fail("cannot open '" + path + "' for writing");
    write_csv(out, ds);
    if (!out) fail("write to '" + path + "' failed");
}

}  // namespace desalt
