#include "desalt/pipeline.hpp"

#include "desalt/physics.hpp"
#include "desalt/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace desalt {

namespace {

Vector floor_salts(Vector salts, int& floored) {
    floored = 0;
    for (Eigen::Index i = 0; i < salts.size(); ++i)
        if (salts(i) < 0.0) {
            salts(i) = 0.0;
            ++floored;
        }
    return salts;
}

[[noreturn]] void rethrow_staged(const char* stage, const Error& e) {
    throw Error(std::string(stage) + ": " + e.what());
}

}  // namespace

ChainPrediction chain_predict(const Dataset& train, const Dataset& data, Target target,
                              const ModelConfig& salt_model, const ModelConfig& target_model,
                              std::uint64_t seed) {
    if (target == Target::salt_concentration)
        throw ValidationError("chained prediction targets porosity or permeability; "
                              "the salt stage already predicts salt concentration");
    ChainPrediction result;
    Matrix plain_rows;
    try {
        FeatureMatrix train_plain = build_matrix(train, Target::salt_concentration);
        FittedPipeline stage1 =
            fit_pipeline(salt_model, train_plain.rows, *train_plain.targets,
                         derive_seed(seed, 0));
        plain_rows = encode_features(data, false).rows;
        result.salt_predicted =
            floor_salts(predict_pipeline(stage1, plain_rows), result.negative_salt_floored);
    } catch (const Error& e) {
        rethrow_staged("stage 1 (salt prediction)", e);
    }
    try {
        FeatureMatrix train_full = build_matrix(train, target);
        FittedPipeline stage2 = fit_pipeline(target_model, train_full.rows,
                                             *train_full.targets, derive_seed(seed, 1));
        Matrix full_rows(plain_rows.rows(), plain_rows.cols() + 1);
        full_rows.col(0) = result.salt_predicted;
        full_rows.rightCols(plain_rows.cols()) = plain_rows;
        result.target_predicted = predict_pipeline(stage2, full_rows);
    } catch (const Error& e) {
        rethrow_staged("stage 2 (target prediction)", e);
    }
    return result;
}

ChainPrediction chain_predict_loo(const Dataset& ds, Target target,
                                  const ModelConfig& salt_model,
                                  const ModelConfig& target_model, std::uint64_t seed) {
    if (target == Target::salt_concentration)
        throw ValidationError("chained prediction targets porosity or permeability; "
                              "the salt stage already predicts salt concentration");
    ChainPrediction result;
    try {
        FeatureMatrix plain = build_matrix(ds, Target::salt_concentration);
        result.salt_predicted =
            floor_salts(loo_predictions(salt_model, plain, seed),
                        result.negative_salt_floored);
    } catch (const Error& e) {
        rethrow_staged("stage 1 (salt prediction)", e);
    }
    try {
        FeatureMatrix full = build_matrix(ds, target);
        const Eigen::Index n = full.rows.rows();
        if (n < 3) throw ValidationError("leave-one-out needs at least 3 rows");
        const Vector& y = *full.targets;
        result.target_predicted = Vector(n);
        // Mirrors loo_predictions step for step (train rows, scaler, fit
        // seed), differing only in the held-out row's salt column, so a
        // perfect stage 1 reproduces the salt-known path exactly.
        for (Eigen::Index i = 0; i < n; ++i) {
            std::vector<Eigen::Index> train;
            train.reserve(static_cast<size_t>(n - 1));
            for (Eigen::Index r = 0; r < n; ++r)
                if (r != i) train.push_back(r);
            Matrix xtr(n - 1, full.rows.cols());
            Vector ytr(n - 1);
            for (Eigen::Index r = 0; r < n - 1; ++r) {
                xtr.row(r) = full.rows.row(train[static_cast<size_t>(r)]);
                ytr(r) = y(train[static_cast<size_t>(r)]);
            }
            std::optional<Scaler> scaler;
            if (target_model.normalize_features) {
                scaler = fit_scaler(xtr);
                xtr = apply_scaler(*scaler, xtr);
            }
            AnyModel model = fit_model(target_model, xtr, ytr,
                                       derive_seed(seed, static_cast<std::uint64_t>(i)));
            Matrix query = full.rows.row(i);
            query(0, 0) = result.salt_predicted(i);
            if (scaler) query = apply_scaler(*scaler, query);
            result.target_predicted(i) = predict_model(model, query)(0);
        }
    } catch (const Error& e) {
        rethrow_staged("stage 2 (target prediction)", e);
    }
    return result;
}

BenchmarkReport run_benchmark(const FeatureMatrix& fm, const std::vector<ModelEntry>& models,
                              const SplitPlan& plan) {
    if (models.empty()) throw ValidationError("benchmark needs at least one model");
    BenchmarkReport report;
    for (const ModelEntry& entry : models) {
        BenchmarkRow row;
        row.name = entry.name;
        row.config = entry.config;
        row.note = entry.note;
        try {
            row.report = evaluate(entry.config, fm, plan);
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

ComparisonReport compare_approaches(const Dataset& ds, const std::vector<Target>& targets,
                                    const ModelConfig& salt_model,
                                    const ModelConfig& target_model, std::uint64_t seed) {
    if (targets.empty()) throw ValidationError("comparison needs at least one target");
    ComparisonReport report;
    Vector measured_salt = target_vector(ds, Target::salt_concentration);
    for (Target t : targets) {
        if (t == Target::salt_concentration)
            throw ValidationError("comparison targets porosity or permeability");
        ApproachScores scores;
        Vector actual = target_vector(ds, t);

        FeatureMatrix full = build_matrix(ds, t);
        Vector known = loo_predictions(target_model, full, seed);
        scores.ml_salt_known = score_all(actual, known);

        ChainPrediction chained = chain_predict_loo(ds, t, salt_model, target_model, seed);
        scores.ml_salt_predicted = score_all(actual, chained.target_predicted);
        report.negative_salt_floored += chained.negative_salt_floored;

        const Eigen::Index n = actual.size();
        Vector initial(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const CoreSample& s = ds.samples[static_cast<size_t>(i)];
            initial(i) = t == Target::porosity_after ? s.porosity_initial_pct
                                                     : s.permeability_initial_md;
        }
        Vector delta = actual - initial;
        Vector cubic_pred(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector c_others(n - 1), d_others(n - 1);
            Eigen::Index w = 0;
            for (Eigen::Index r = 0; r < n; ++r) {
                if (r == i) continue;
                c_others(w) = measured_salt(r);
                d_others(w) = delta(r);
                ++w;
            }
            CubicBaseline baseline = fit_cubic_baseline(c_others, d_others);
            cubic_pred(i) = initial(i) + eval_cubic(baseline, measured_salt(i));
        }
        scores.one_feature_cubic = score_all(actual, cubic_pred);

        report.per_target.emplace_back(t, scores);
    }
    return report;
}

std::string format_fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string format_sig3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

namespace {

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c + 1 < row.size()) {
                std::string cell = row[c];
                cell.append(widths[c] + 2 - cell.size(), ' ');
                out += cell;
            } else {
                out += row[c];
            }
        }
        out += '\n';
    }
    return out;
}

std::string benchmark_table(const BenchmarkReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"model", "r2", "r2_std", "mae", "mae_std", "mse", "mse_std", "excluded"});
    std::vector<std::string> footnotes;
    for (const BenchmarkRow& row : report.rows) {
        if (!row.ok) {
            rows.push_back({row.name, "failed", "-", "-", "-", "-", "-", "-"});
            footnotes.push_back(row.name + ": " + row.error);
            continue;
        }
        const CvReport& r = row.report;
        rows.push_back({row.name, format_fixed3(r.r2_mean), format_fixed3(r.r2_std),
                        format_sig3(r.mae_mean), format_sig3(r.mae_std),
                        format_sig3(r.mse_mean), format_sig3(r.mse_std),
                        std::to_string(r.r2_excluded)});
        if (!row.note.empty()) footnotes.push_back(row.name + ": " + row.note);
    }
    std::string out = render_table(rows);
    for (const std::string& note : footnotes) out += "# " + note + "\n";
    return out;
}

std::string benchmark_csv(const BenchmarkReport& report) {
    std::string out = "model,r2,r2_std,mae,mae_std,mse,mse_std,r2_excluded,note,error\n";
    for (const BenchmarkRow& row : report.rows) {
        out += csv_safe(row.name) + ',';
        if (row.ok) {
            const CvReport& r = row.report;
            out += format_double(r.r2_mean) + ',' + format_double(r.r2_std) + ',' +
                   format_double(r.mae_mean) + ',' + format_double(r.mae_std) + ',' +
                   format_double(r.mse_mean) + ',' + format_double(r.mse_std) + ',' +
                   std::to_string(r.r2_excluded) + ',' + csv_safe(row.note) + ',';
        } else {
            out += ",,,,,,," + csv_safe(row.note) + ',' + csv_safe(row.error);
        }
        out += '\n';
    }
    return out;
}

namespace {

const char* approach_label(int which) {
    switch (which) {
        case 0: return "ml_salt_known";
        case 1: return "ml_salt_predicted";
        default: return "one_feature_cubic";
    }
}

const MetricTriple& approach_scores(const ApproachScores& s, int which) {
    switch (which) {
        case 0: return s.ml_salt_known;
        case 1: return s.ml_salt_predicted;
        default: return s.one_feature_cubic;
    }
}

}  // namespace

std::string comparison_table(const ComparisonReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"target", "approach", "r2", "mae", "mse"});
    for (const auto& [target, scores] : report.per_target)
        for (int which = 0; which < 3; ++which) {
            const MetricTriple& m = approach_scores(scores, which);
            rows.push_back({target_name(target), approach_label(which),
                            format_fixed3(m.r2), format_sig3(m.mae), format_sig3(m.mse)});
        }
    std::string out = render_table(rows);
    if (report.negative_salt_floored > 0)
        out += "# stage-1 salt predictions floored at 0: " +
               std::to_string(report.negative_salt_floored) + "\n";
    return out;
}

std::string comparison_csv(const ComparisonReport& report) {
    std::string out = "target,approach,r2,mae,mse\n";
    for (const auto& [target, scores] : report.per_target)
        for (int which = 0; which < 3; ++which) {
            const MetricTriple& m = approach_scores(scores, which);
            out += std::string(target_name(target)) + ',' + approach_label(which) + ',' +
                   format_double(m.r2) + ',' + format_double(m.mae) + ',' +
                   format_double(m.mse) + '\n';
        }
    return out;
}

}  // namespace desalt
