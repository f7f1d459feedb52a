#include "desalt/model_selection.hpp"

#include "desalt/metrics.hpp"
#include "desalt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

namespace desalt {

SplitPlan SplitPlan::shuffle_plan(double test_fraction, int repeats, std::uint64_t seed) {
    SplitPlan p;
    p.kind = Kind::shuffle;
    p.test_fraction = test_fraction;
    p.repeats = repeats;
    p.seed = seed;
    return p;
}

SplitPlan SplitPlan::kfold_plan(int k, std::uint64_t seed) {
    SplitPlan p;
    p.kind = Kind::kfold;
    p.k = k;
    p.seed = seed;
    return p;
}

namespace {

std::vector<Eigen::Index> seeded_permutation(Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i) {
        Eigen::Index j =
            static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
    return perm;
}

}  // namespace

std::vector<Split> make_splits(Eigen::Index n, const SplitPlan& plan) {
    if (n < 3) throw ValidationError("splitting needs at least 3 rows");
    std::vector<Split> splits;
    Rng rng(plan.seed);
    if (plan.kind == SplitPlan::Kind::shuffle) {
        if (!(plan.test_fraction > 0.0 && plan.test_fraction < 1.0))
            throw ValidationError("test fraction must be in (0, 1)");
        if (plan.repeats < 1) throw ValidationError("repeats must be at least 1");
        const auto test_size = static_cast<Eigen::Index>(
            std::floor(plan.test_fraction * static_cast<double>(n)));
        if (test_size < 1)
            throw ValidationError("test fraction " + std::to_string(plan.test_fraction) +
                                  " leaves an empty test set for n = " + std::to_string(n));
        for (int r = 0; r < plan.repeats; ++r) {
            std::vector<Eigen::Index> perm = seeded_permutation(n, rng);
            Split s;
            s.test.assign(perm.begin(), perm.begin() + test_size);
            s.train.assign(perm.begin() + test_size, perm.end());
            std::sort(s.test.begin(), s.test.end());
            std::sort(s.train.begin(), s.train.end());
            splits.push_back(std::move(s));
        }
        return splits;
    }
    const Eigen::Index k = plan.k;
    if (k < 2 || k > n)
        throw ValidationError("k must be between 2 and the number of rows");
    std::vector<Eigen::Index> perm = seeded_permutation(n, rng);
    Eigen::Index start = 0;
    for (Eigen::Index f = 0; f < k; ++f) {
        const Eigen::Index size = n / k + (f < n % k ? 1 : 0);
        Split s;
        s.test.assign(perm.begin() + start, perm.begin() + start + size);
        s.train.reserve(static_cast<size_t>(n - size));
        s.train.insert(s.train.end(), perm.begin(), perm.begin() + start);
        s.train.insert(s.train.end(), perm.begin() + start + size, perm.end());
        std::sort(s.test.begin(), s.test.end());
        std::sort(s.train.begin(), s.train.end());
        splits.push_back(std::move(s));
        start += size;
    }
    return splits;
}

namespace {

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Vector take_elems(const Vector& v, const std::vector<Eigen::Index>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

struct MeanStd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
};

MeanStd mean_and_population_std(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

bool is_constant(const Vector& v) {
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) != v(0)) return false;
    return true;
}

}  // namespace

CvReport evaluate(const ModelConfig& config, const FeatureMatrix& fm, const SplitPlan& plan,
                  EvalTrace* trace) {
    if (!fm.targets) throw ValidationError("feature matrix carries no targets");
    const Vector& y = *fm.targets;
    std::vector<Split> splits = make_splits(fm.rows.rows(), plan);

    CvReport report;
    std::vector<double> r2s, maes, mses;
    for (size_t f = 0; f < splits.size(); ++f) {
        const Split& split = splits[f];
        Matrix xtr = take_rows(fm.rows, split.train);
        Matrix xte = take_rows(fm.rows, split.test);
        Vector ytr = take_elems(y, split.train);
        Vector yte = take_elems(y, split.test);
        std::optional<Scaler> scaler;
        if (config.normalize_features) {
            scaler = fit_scaler(xtr);
            xtr = apply_scaler(*scaler, xtr);
            xte = apply_scaler(*scaler, xte);
        }
        AnyModel model =
            fit_model(config, xtr, ytr, derive_seed(plan.seed, static_cast<std::uint64_t>(f)));
        Vector pred = predict_model(model, xte);

        FoldScore score;
        score.mae = mae(yte, pred);
        score.mse = mse(yte, pred);
        if (yte.size() >= 2 && !is_constant(yte)) {
            score.r2 = r2(yte, pred);
            r2s.push_back(score.r2);
        } else {
            score.r2 = std::numeric_limits<double>::quiet_NaN();
            score.r2_valid = false;
            ++report.r2_excluded;
        }
        maes.push_back(score.mae);
        mses.push_back(score.mse);
        report.fold_scores.push_back(score);
        if (trace) {
            trace->fold_train_indices.push_back(split.train);
            trace->fold_scalers.push_back(scaler);
        }
    }
    MeanStd r2_stats = mean_and_population_std(r2s);
    MeanStd mae_stats = mean_and_population_std(maes);
    MeanStd mse_stats = mean_and_population_std(mses);
    report.r2_mean = r2_stats.mean;
    report.r2_std = r2_stats.std;
    report.mae_mean = mae_stats.mean;
    report.mae_std = mae_stats.std;
    report.mse_mean = mse_stats.mean;
    report.mse_std = mse_stats.std;
    return report;
}

std::vector<std::pair<std::string, std::vector<double>>> parse_grid_axes(std::istream& in) {
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
                s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.remove_suffix(1);
            return s;
        };
        view = trim(view);
        if (view.empty() || view.front() == '#') continue;
        size_t eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("grid line " + std::to_string(line_no) +
                                  ": expected 'name = v1, v2, ...'");
        std::string name(trim(view.substr(0, eq)));
        if (name.empty())
            throw ValidationError("grid line " + std::to_string(line_no) +
                                  ": empty hyperparameter name");
        for (const auto& axis : axes)
            if (axis.first == name)
                throw ValidationError("grid line " + std::to_string(line_no) +
                                      ": duplicate axis '" + name + "'");
        std::vector<double> values;
        std::string_view rest = view.substr(eq + 1);
        while (true) {
            size_t comma = rest.find(',');
            std::string_view tok = trim(comma == std::string_view::npos
                                            ? rest
                                            : rest.substr(0, comma));
            if (tok.empty())
                throw ValidationError("grid line " + std::to_string(line_no) +
                                      ": empty value");
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw ValidationError("grid line " + std::to_string(line_no) +
                                      ": bad value '" + std::string(tok) + "'");
            values.push_back(v);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        axes.emplace_back(std::move(name), std::move(values));
    }
    if (axes.empty()) throw ValidationError("grid file defines no axes");
    return axes;
}

std::vector<std::pair<std::string, std::vector<double>>> load_grid_axes(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return parse_grid_axes(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

SelectionMetric selection_metric_from_name(std::string_view name) {
    if (name == "r2") return SelectionMetric::r2;
    if (name == "mae") return SelectionMetric::mae;
    if (name == "mse") return SelectionMetric::mse;
    throw ValidationError("unknown selection metric '" + std::string(name) +
                          "'; expected r2, mae, or mse");
}

GridResult grid_search(const GridSpec& grid, const ModelConfig& base, const FeatureMatrix& fm,
                       SelectionMetric metric) {
    if (grid.axes.empty()) throw ValidationError("grid has no axes");
    for (const auto& [name, values] : grid.axes) {
        if (values.empty())
            throw ValidationError("grid axis '" + name + "' has no candidate values");
        base.with(name, values.front());  // rejects names foreign to the algorithm
    }

    GridResult result;
    bool have_best = false;
    double best_score = 0.0;
    std::vector<std::string> failures;
    std::vector<size_t> cursor(grid.axes.size(), 0);
    while (true) {
        ModelConfig candidate = base;
        for (size_t a = 0; a < grid.axes.size(); ++a)
            candidate.set(grid.axes[a].first, grid.axes[a].second[cursor[a]]);
        try {
            CvReport report = evaluate(candidate, fm, grid.plan);
            double score = metric == SelectionMetric::r2   ? report.r2_mean
                           : metric == SelectionMetric::mae ? report.mae_mean
                                                            : report.mse_mean;
            bool better = false;
            if (std::isfinite(score)) {
                if (!have_best) better = true;
                else if (metric == SelectionMetric::r2) better = score > best_score;
                else better = score < best_score;
            }
            if (better) {
                have_best = true;
                best_score = score;
                result.best_config = candidate;
                result.best_report = report;
            }
            result.points.push_back({std::move(candidate), std::move(report)});
        } catch (const Error& e) {
            if (failures.size() < 8) failures.push_back(e.what());
            else if (failures.size() == 8) failures.push_back("...");
        }
        size_t a = grid.axes.size();
        while (a > 0) {
            --a;
            if (++cursor[a] < grid.axes[a].second.size()) break;
            cursor[a] = 0;
            if (a == 0) {
                if (!have_best) {
                    std::string msg = "every grid point failed to evaluate:";
                    for (const std::string& f : failures) msg += "\n  " + f;
                    throw Error(msg);
                }
                return result;
            }
        }
    }
}

Vector loo_predictions(const ModelConfig& config, const FeatureMatrix& fm, std::uint64_t seed,
                       EvalTrace* trace) {
    if (!fm.targets) throw ValidationError("feature matrix carries no targets");
    const Eigen::Index n = fm.rows.rows();
    if (n < 3) throw ValidationError("leave-one-out needs at least 3 rows");
    const Vector& y = *fm.targets;
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<Eigen::Index> train;
        train.reserve(static_cast<size_t>(n - 1));
        for (Eigen::Index r = 0; r < n; ++r)
            if (r != i) train.push_back(r);
        Matrix xtr = take_rows(fm.rows, train);
        Vector ytr = take_elems(y, train);
        std::optional<Scaler> scaler;
        try {
            if (config.normalize_features) {
                scaler = fit_scaler(xtr);
                xtr = apply_scaler(*scaler, xtr);
            }
            AnyModel model =
                fit_model(config, xtr, ytr, derive_seed(seed, static_cast<std::uint64_t>(i)));
            Matrix query = fm.rows.row(i);
            if (scaler) query = apply_scaler(*scaler, query);
            out(i) = predict_model(model, query)(0);
        } catch (const Error& e) {
            throw Error("leave-one-out fit holding out row " + std::to_string(i) +
                        " failed: " + e.what());
        }
        if (trace) {
            trace->fold_train_indices.push_back(std::move(train));
            trace->fold_scalers.push_back(std::move(scaler));
        }
    }
    return out;
}

}  // namespace desalt
