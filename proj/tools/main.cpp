#include "desalt/dataset.hpp"
#include "desalt/metrics.hpp"
#include "desalt/model_config.hpp"
#include "desalt/model_selection.hpp"
#include "desalt/physics.hpp"
#include "desalt/pipeline.hpp"
#include "desalt/presets.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace desalt;

/// Flag misuse detected after CLI11 parsing (bad names, bad combinations).
struct UsageFailure {
    std::string message;
};

/// Hyperparameter flags shared by the model-taking subcommands. Only flags
/// the user actually passed are applied, so presets stay intact underneath.
struct HyperFlags {
    std::vector<std::pair<std::string, double>> values;
    std::vector<CLI::Option*> options;
    std::vector<std::string> keys;
    std::string hidden;
    CLI::Option* hidden_option = nullptr;
    bool normalize = false;
    CLI::Option* normalize_option = nullptr;

    void attach(CLI::App* cmd) {
        values.reserve(16);  // CLI11 keeps references into this vector
        auto add = [&](const char* flag, const char* key, const char* desc) {
            values.emplace_back(key, 0.0);
            keys.push_back(key);
            options.push_back(cmd->add_option(flag, values.back().second, desc));
        };
        add("--lambda", "lambda", "L1/L2 penalty weight");
        add("--max-depth", "max_depth", "tree depth limit");
        add("--min-samples-leaf", "min_samples_leaf", "minimum rows per leaf");
        add("--n-estimators", "n_estimators", "ensemble size");
        add("--learning-rate", "learning_rate", "boosting shrinkage or network step size");
        add("--subsample", "subsample", "row fraction per boosting round");
        add("--max-features", "max_features", "feature fraction per boosted tree");
        add("--reg-lambda", "reg_lambda", "L2 leaf regularization");
        add("--gamma", "gamma", "kernel inverse width");
        add("--c", "c", "box constraint");
        add("--epsilon", "epsilon", "insensitive tube half-width");
        add("--tol", "tol", "solver KKT tolerance");
        add("--max-epochs", "max_epochs", "training epoch limit");
        add("--batch-size", "batch_size", "minibatch size (0 = full batch)");
        add("--tolerance", "tolerance", "early-stopping loss threshold");
        hidden_option = cmd->add_option("--hidden", hidden,
                                        "hidden layer sizes, comma separated (up to 3)");
        normalize_option = cmd->add_flag("--normalize,!--no-normalize", normalize,
                                         "standardize features on the train fold");
    }

    void apply(ModelConfig& config) const {
        try {
            for (size_t i = 0; i < options.size(); ++i)
                if (options[i]->count() > 0) config.set(keys[i], values[i].second);
            if (hidden_option && hidden_option->count() > 0) {
                std::vector<double> sizes;
                std::string_view rest = hidden;
                while (!rest.empty()) {
                    size_t comma = rest.find(',');
                    std::string_view tok = rest.substr(0, comma);
                    double v = 0.0;
                    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                    if (ec != std::errc() || ptr != tok.data() + tok.size())
                        throw UsageFailure{"--hidden: bad size '" + std::string(tok) + "'"};
                    sizes.push_back(v);
                    rest = comma == std::string_view::npos ? std::string_view{}
                                                           : rest.substr(comma + 1);
                }
                if (sizes.empty() || sizes.size() > 3)
                    throw UsageFailure{"--hidden takes 1 to 3 comma-separated sizes"};
                config.set("hidden1", sizes[0]);
                config.set("hidden2", sizes.size() > 1 ? sizes[1] : 0.0);
                config.set("hidden3", sizes.size() > 2 ? sizes[2] : 0.0);
            }
            if (normalize_option && normalize_option->count() > 0)
                config.normalize_features = normalize;
        } catch (const ValidationError& e) {
            throw UsageFailure{e.what()};
        }
    }
};

Target parse_target(const std::string& name) {
    try {
        return target_from_name(name);
    } catch (const ValidationError& e) {
        throw UsageFailure{e.what()};
    }
}

ModelConfig build_config(const std::string& model_name, Target target,
                         const std::string& preset, const HyperFlags& flags) {
    Algorithm algo;
    try {
        algo = algorithm_from_name(model_name);
    } catch (const ValidationError& e) {
        throw UsageFailure{e.what()};
    }
    ModelConfig config;
    if (preset.empty()) {
        config = ModelConfig::make(algo);
    } else if (preset == "paper") {
        try {
            config = tuned_preset(algo, target);
        } catch (const ValidationError& e) {
            throw UsageFailure{e.what()};
        }
    } else {
        throw UsageFailure{"unknown preset '" + preset + "'; available: paper"};
    }
    flags.apply(config);
    return config;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("write to '" + path + "' failed");
}

std::string cv_table(const std::string& name, const CvReport& r) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"model", "r2", "r2_std", "mae", "mae_std", "mse", "mse_std", "excluded"});
    rows.push_back({name, format_fixed3(r.r2_mean), format_fixed3(r.r2_std),
                    format_sig3(r.mae_mean), format_sig3(r.mae_std), format_sig3(r.mse_mean),
                    format_sig3(r.mse_std), std::to_string(r.r2_excluded)});
    return render_table(rows);
}

std::string cv_csv(const std::string& name, const CvReport& r) {
    return "model,r2,r2_std,mae,mae_std,mse,mse_std,r2_excluded\n" + name + ',' +
           format_double(r.r2_mean) + ',' + format_double(r.r2_std) + ',' +
           format_double(r.mae_mean) + ',' + format_double(r.mae_std) + ',' +
           format_double(r.mse_mean) + ',' + format_double(r.mse_std) + ',' +
           std::to_string(r.r2_excluded) + '\n';
}

struct GenSynthArgs {
    std::int64_t n = 102;
    double noise = 0.0;
    std::uint64_t seed = 42;
    double salt_density = 2.165;
    std::string out;
    std::string config_path;
    CLI::Option *n_opt, *noise_opt, *seed_opt;
};

struct DataArgs {
    std::string data;
    std::string target;
    std::string model;
    std::string preset;
    std::uint64_t seed = 42;
    int repeats = 10;
    double test_fraction = 0.35;
};

int run(int argc, char** argv) {
    CLI::App app{"Core-sample desalination response predictor"};
    app.require_subcommand(1);

    // gen-synth
    auto gen = GenSynthArgs{};
    CLI::App* gen_cmd = app.add_subcommand("gen-synth", "generate a synthetic dataset");
    gen.n_opt = gen_cmd->add_option("--n", gen.n, "sample count");
    gen.noise_opt = gen_cmd->add_option("--noise", gen.noise, "relative target noise");
    gen.seed_opt = gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--out", gen.out, "output CSV path")->required();
    gen_cmd->add_option("--config", gen.config_path, "key = value generator config");
    gen_cmd->add_option("--salt-density", gen.salt_density, "salt density, g/cc");
    gen_cmd->callback([&] {
        SynthConfig cfg;
        if (!gen.config_path.empty()) cfg = load_synth_config(gen.config_path);
        if (gen.n_opt->count() > 0) cfg.n_samples = static_cast<Eigen::Index>(gen.n);
        if (gen.noise_opt->count() > 0) cfg.noise_rel = gen.noise;
        if (gen.seed_opt->count() > 0) cfg.seed = gen.seed;
        PhysicsParams params;
        params.salt_density_gcc = gen.salt_density;
        save_csv(gen.out, generate_synthetic(cfg, params));
    });

    // gridsearch
    auto gs = DataArgs{};
    std::string grid_path, metric_name = "r2";
    HyperFlags gs_flags;
    CLI::App* gs_cmd = app.add_subcommand("gridsearch", "grid-search hyperparameters");
    gs_cmd->add_option("--data", gs.data, "dataset CSV")->required();
    gs_cmd->add_option("--target", gs.target, "target name")->required();
    gs_cmd->add_option("--model", gs.model, "algorithm name")->required();
    gs_cmd->add_option("--grid", grid_path, "grid file: name = v1, v2, ...")->required();
    gs_cmd->add_option("--seed", gs.seed, "split/fit seed");
    gs_cmd->add_option("--repeats", gs.repeats, "shuffle-split repeats");
    gs_cmd->add_option("--test-fraction", gs.test_fraction, "test fraction");
    gs_cmd->add_option("--metric", metric_name, "selection metric: r2, mae, mse");
    gs_cmd->add_option("--preset", gs.preset, "base preset to search around");
    gs_flags.attach(gs_cmd);
    gs_cmd->callback([&] {
        Target target = parse_target(gs.target);
        ModelConfig base = build_config(gs.model, target, gs.preset, gs_flags);
        SelectionMetric metric;
        try {
            metric = selection_metric_from_name(metric_name);
        } catch (const ValidationError& e) {
            throw UsageFailure{e.what()};
        }
        Dataset ds = load_csv(gs.data);
        FeatureMatrix fm = build_matrix(ds, target);
        GridSpec grid;
        grid.axes = load_grid_axes(grid_path);
        grid.plan = SplitPlan::shuffle_plan(gs.test_fraction, gs.repeats, gs.seed);
        GridResult result = grid_search(grid, base, fm, metric);

        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> header;
        for (const auto& axis : grid.axes) header.push_back(axis.first);
        header.insert(header.end(), {"r2", "r2_std", "mae", "mse"});
        rows.push_back(header);
        std::string csv;
        for (const auto& name : header) csv += (csv.empty() ? "" : ",") + name;
        csv += '\n';
        for (const GridPoint& point : result.points) {
            std::vector<std::string> row;
            for (const auto& axis : grid.axes)
                row.push_back(format_double(point.config.get(axis.first)));
            const CvReport& r = point.report;
            row.insert(row.end(), {format_fixed3(r.r2_mean), format_fixed3(r.r2_std),
                                   format_sig3(r.mae_mean), format_sig3(r.mse_mean)});
            rows.push_back(row);
            for (const auto& axis : grid.axes)
                csv += format_double(point.config.get(axis.first)) + ',';
            csv += format_double(r.r2_mean) + ',' + format_double(r.r2_std) + ',' +
                   format_double(r.mae_mean) + ',' + format_double(r.mse_mean) + '\n';
        }
        std::cout << render_table(rows) << '\n';
        std::string best = "best:";
        for (const auto& axis : grid.axes)
            best += ' ' + axis.first + '=' + format_double(result.best_config.get(axis.first));
        std::cout << best << '\n' << cv_table("best", result.best_report) << '\n' << csv;
    });

    // evaluate
    auto ev = DataArgs{};
    ev.repeats = 100;
    HyperFlags ev_flags;
    CLI::App* ev_cmd = app.add_subcommand("evaluate", "cross-validate one model");
    ev_cmd->add_option("--data", ev.data, "dataset CSV")->required();
    ev_cmd->add_option("--target", ev.target, "target name")->required();
    ev_cmd->add_option("--model", ev.model, "algorithm name")->required();
    ev_cmd->add_option("--preset", ev.preset, "named preset: paper");
    ev_cmd->add_option("--repeats", ev.repeats, "shuffle-split repeats");
    ev_cmd->add_option("--test-fraction", ev.test_fraction, "test fraction");
    ev_cmd->add_option("--seed", ev.seed, "split/fit seed");
    ev_flags.attach(ev_cmd);
    ev_cmd->callback([&] {
        Target target = parse_target(ev.target);
        ModelConfig config = build_config(ev.model, target, ev.preset, ev_flags);
        Dataset ds = load_csv(ev.data);
        FeatureMatrix fm = build_matrix(ds, target);
        SplitPlan plan = SplitPlan::shuffle_plan(ev.test_fraction, ev.repeats, ev.seed);
        CvReport report = evaluate(config, fm, plan);
        std::cout << cv_table(ev.model, report) << '\n' << cv_csv(ev.model, report);
    });

    // loo-predict
    auto loo = DataArgs{};
    std::string loo_out;
    HyperFlags loo_flags;
    CLI::App* loo_cmd =
        app.add_subcommand("loo-predict", "leave-one-out predictions per sample");
    loo_cmd->add_option("--data", loo.data, "dataset CSV")->required();
    loo_cmd->add_option("--target", loo.target, "target name")->required();
    loo_cmd->add_option("--model", loo.model, "algorithm name")->required();
    loo_cmd->add_option("--preset", loo.preset, "named preset: paper");
    loo_cmd->add_option("--seed", loo.seed, "fit seed");
    loo_cmd->add_option("--out", loo_out, "output CSV path")->required();
    loo_flags.attach(loo_cmd);
    loo_cmd->callback([&] {
        Target target = parse_target(loo.target);
        ModelConfig config = build_config(loo.model, target, loo.preset, loo_flags);
        Dataset ds = load_csv(loo.data);
        FeatureMatrix fm = build_matrix(ds, target);
        Vector pred = loo_predictions(config, fm, loo.seed);
        std::string csv = "sample_id,actual,predicted\n";
        for (Eigen::Index i = 0; i < pred.size(); ++i)
            csv += ds.samples[static_cast<size_t>(i)].sample_id + ',' +
                   format_double((*fm.targets)(i)) + ',' + format_double(pred(i)) + '\n';
        write_file(loo_out, csv);
        MetricTriple m = score_all(*fm.targets, pred);
        std::vector<std::vector<std::string>> rows = {
            {"r2", "mae", "mse"},
            {format_fixed3(m.r2), format_sig3(m.mae), format_sig3(m.mse)}};
        std::cout << render_table(rows);
    });

    // chain-predict
    std::string cp_train, cp_data, cp_target, cp_salt_model = "forest",
                cp_target_model = "forest", cp_out, cp_preset;
    std::uint64_t cp_seed = 42;
    CLI::App* cp_cmd = app.add_subcommand(
        "chain-predict", "predict salts, then the target with predicted salts");
    cp_cmd->add_option("--train", cp_train, "training CSV with measured targets")->required();
    cp_cmd->add_option("--data", cp_data, "CSV of samples to predict")->required();
    cp_cmd->add_option("--target", cp_target, "target name")->required();
    cp_cmd->add_option("--salt-model", cp_salt_model, "stage-1 algorithm");
    cp_cmd->add_option("--target-model", cp_target_model, "stage-2 algorithm");
    cp_cmd->add_option("--preset", cp_preset, "named preset: paper");
    cp_cmd->add_option("--seed", cp_seed, "fit seed");
    cp_cmd->add_option("--out", cp_out, "output CSV path")->required();
    cp_cmd->callback([&] {
        Target target = parse_target(cp_target);
        HyperFlags no_flags;
        ModelConfig salt_config = build_config(cp_salt_model, Target::salt_concentration,
                                               cp_preset, no_flags);
        ModelConfig target_config = build_config(cp_target_model, target, cp_preset, no_flags);
        Dataset train = load_csv(cp_train);
        Dataset data = load_csv(cp_data);
        ChainPrediction result =
            chain_predict(train, data, target, salt_config, target_config, cp_seed);
        std::string csv = std::string("sample_id,salt_predicted,") + target_column(target) +
                          "_predicted\n";
        for (Eigen::Index i = 0; i < result.target_predicted.size(); ++i)
            csv += data.samples[static_cast<size_t>(i)].sample_id + ',' +
                   format_double(result.salt_predicted(i)) + ',' +
                   format_double(result.target_predicted(i)) + '\n';
        write_file(cp_out, csv);
        if (result.negative_salt_floored > 0)
            std::cerr << "warning: " << result.negative_salt_floored
                      << " stage-1 salt predictions were negative and floored at 0\n";
    });

    // benchmark
    auto bm = DataArgs{};
    bm.repeats = 100;
    std::string bm_models = "all", bm_out;
    CLI::App* bm_cmd = app.add_subcommand("benchmark", "score several models on one target");
    bm_cmd->add_option("--data", bm.data, "dataset CSV")->required();
    bm_cmd->add_option("--target", bm.target, "target name")->required();
    bm_cmd->add_option("--models", bm_models, "'all' or comma-separated algorithm names");
    bm_cmd->add_option("--out", bm_out, "output CSV path")->required();
    bm_cmd->add_option("--seed", bm.seed, "split/fit seed");
    bm_cmd->add_option("--repeats", bm.repeats, "shuffle-split repeats");
    bm_cmd->add_option("--test-fraction", bm.test_fraction, "test fraction");
    bm_cmd->callback([&] {
        Target target = parse_target(bm.target);
        std::vector<ModelEntry> entries;
        auto add_entry = [&](Algorithm a) {
            ModelEntry entry;
            entry.name = algorithm_name(a);
            try {
                entry.config = tuned_preset(a, target);
                entry.note = preset_note(a);
            } catch (const ValidationError&) {
                entry.config = ModelConfig::make(a);
            }
            entries.push_back(std::move(entry));
        };
        if (bm_models == "all") {
            for (Algorithm a : preset_algorithms()) add_entry(a);
        } else {
            std::string_view rest = bm_models;
            while (!rest.empty()) {
                size_t comma = rest.find(',');
                std::string name(rest.substr(0, comma));
                try {
                    add_entry(algorithm_from_name(name));
                } catch (const ValidationError& e) {
                    throw UsageFailure{e.what()};
                }
                rest = comma == std::string_view::npos ? std::string_view{}
                                                       : rest.substr(comma + 1);
            }
            if (entries.empty()) throw UsageFailure{"--models lists no algorithms"};
        }
        Dataset ds = load_csv(bm.data);
        FeatureMatrix fm = build_matrix(ds, target);
        SplitPlan plan = SplitPlan::shuffle_plan(bm.test_fraction, bm.repeats, bm.seed);
        BenchmarkReport report = run_benchmark(fm, entries, plan);
        write_file(bm_out, benchmark_csv(report));
        std::cout << benchmark_table(report);
    });

    // compare
    std::string cm_data, cm_targets = "porosity_after,permeability_after",
                cm_salt_model = "forest", cm_target_model = "forest", cm_out;
    std::uint64_t cm_seed = 42;
    CLI::App* cm_cmd = app.add_subcommand(
        "compare", "salt-known vs chained vs one-feature cubic, leave-one-out");
    cm_cmd->add_option("--data", cm_data, "dataset CSV")->required();
    cm_cmd->add_option("--targets", cm_targets, "comma-separated target names");
    cm_cmd->add_option("--salt-model", cm_salt_model, "stage-1 algorithm");
    cm_cmd->add_option("--target-model", cm_target_model, "target algorithm");
    cm_cmd->add_option("--seed", cm_seed, "fit seed");
    cm_cmd->add_option("--out", cm_out, "output CSV path")->required();
    cm_cmd->callback([&] {
        std::vector<Target> targets;
        std::string_view rest = cm_targets;
        while (!rest.empty()) {
            size_t comma = rest.find(',');
            targets.push_back(parse_target(std::string(rest.substr(0, comma))));
            rest = comma == std::string_view::npos ? std::string_view{}
                                                   : rest.substr(comma + 1);
        }
        if (targets.empty()) throw UsageFailure{"--targets lists no targets"};
        HyperFlags no_flags;
        ModelConfig salt_config =
            build_config(cm_salt_model, Target::salt_concentration, "", no_flags);
        ModelConfig target_config = build_config(cm_target_model, targets.front(), "", no_flags);
        Dataset ds = load_csv(cm_data);
        ComparisonReport report =
            compare_approaches(ds, targets, salt_config, target_config, cm_seed);
        write_file(cm_out, comparison_csv(report));
        std::cout << comparison_table(report);
    });

    // importance
    auto imp = DataArgs{};
    imp.model = "gbm";
    std::string imp_out;
    HyperFlags imp_flags;
    CLI::App* imp_cmd =
        app.add_subcommand("importance", "per-feature split counts of a fitted ensemble");
    imp_cmd->add_option("--data", imp.data, "dataset CSV")->required();
    imp_cmd->add_option("--target", imp.target, "target name")->required();
    imp_cmd->add_option("--model", imp.model, "gbm or forest");
    imp_cmd->add_option("--preset", imp.preset, "named preset: paper");
    imp_cmd->add_option("--seed", imp.seed, "fit seed");
    imp_cmd->add_option("--out", imp_out, "output CSV path")->required();
    imp_flags.attach(imp_cmd);
    imp_cmd->callback([&] {
        Target target = parse_target(imp.target);
        ModelConfig config = build_config(imp.model, target, imp.preset, imp_flags);
        if (config.algorithm != Algorithm::gbm &&
            config.algorithm != Algorithm::gbm_regularized &&
            config.algorithm != Algorithm::forest)
            throw UsageFailure{"importance requires an ensemble model: gbm or forest"};
        Dataset ds = load_csv(imp.data);
        FeatureMatrix fm = build_matrix(ds, target);
        FittedPipeline fitted = fit_pipeline(config, fm.rows, *fm.targets, imp.seed);
        FeatureImportance fi;
        if (const GbmModel* gbm = std::get_if<GbmModel>(&fitted.model))
            fi = feature_fscore(*gbm);
        else
            fi = feature_fscore(std::get<ForestModel>(fitted.model));
        std::string csv = "feature,fscore,rank\n";
        for (size_t rank = 0; rank < fi.ranking.size(); ++rank) {
            int feature = fi.ranking[rank];
            csv += fm.schema.column_names[static_cast<size_t>(feature)] + ',' +
                   std::to_string(fi.counts[static_cast<size_t>(feature)]) + ',' +
                   std::to_string(rank + 1) + '\n';
        }
        write_file(imp_out, csv);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageFailure& e) {
        std::cerr << "error: " << e.message << '\n';
        return 1;
    } catch (const desalt::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
