#include "desalt/pipeline.hpp"
#include "desalt/physics.hpp"
#include "desalt/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace desalt;

namespace {

Dataset small_synth(Eigen::Index n, double noise, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_samples = n;
    cfg.noise_rel = noise;
    cfg.seed = seed;
    return generate_synthetic(cfg);
}

// Salt depends affinely on grain size alone; every other feature is held
// constant, and the porosity target follows the exact balance. A plain
// linear fit reproduces both relations exactly, held-out rows included.
Dataset affine_salt_dataset() {
    Dataset ds;
    ds.provenance = "handmade";
    for (int i = 0; i < 8; ++i) {
        CoreSample s;
        s.sample_id = "H" + std::to_string(i + 1);
        s.formation_top_depth_m = 1400.0;
        s.formation_bottom_depth_m = 1500.0;
        s.sample_depth_m = 1450.0;
        s.porosity_initial_pct = 5.0;
        s.permeability_initial_md = 10.0;
        s.density_initial_gcc = 2.4;
        s.grain_size_mm = 0.1 * (i + 1);
        s.color = "red";
        s.horizon = "talakh";
        const double salt = 0.3 - 0.3 * s.grain_size_mm;
        s.salt_concentration_gg = salt;
        s.porosity_after_pct = porosity_after_desalination(5.0, 2.4, salt);
        s.permeability_after_md = 15.0;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("a memorizing salt stage reproduces the salt-known path") {
    Dataset ds = small_synth(25, 0.02, 1);
    ModelConfig salt_stage = ModelConfig::make(Algorithm::tree).with("max_depth", 30.0);
    ModelConfig target_stage = ModelConfig::make(Algorithm::plain);
    ChainPrediction chained =
        chain_predict(ds, ds, Target::porosity_after, salt_stage, target_stage, 9);

    Vector measured = target_vector(ds, Target::salt_concentration);
    REQUIRE(chained.salt_predicted.size() == measured.size());
    CHECK((chained.salt_predicted - measured).cwiseAbs().maxCoeff() == 0.0);
    CHECK(chained.negative_salt_floored == 0);

    FeatureMatrix full = build_matrix(ds, Target::porosity_after);
    FittedPipeline direct = fit_pipeline(target_stage, full.rows, *full.targets, 123);
    Vector expected = predict_pipeline(direct, full.rows);
    CHECK((chained.target_predicted - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an exactly learnable salt stage makes chained loo match salt-known loo") {
    Dataset ds = affine_salt_dataset();
    ModelConfig plain = ModelConfig::make(Algorithm::plain);
    ChainPrediction chained =
        chain_predict_loo(ds, Target::porosity_after, plain, plain, 5);

    Vector measured = target_vector(ds, Target::salt_concentration);
    CHECK((chained.salt_predicted - measured).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(chained.negative_salt_floored == 0);

    FeatureMatrix full = build_matrix(ds, Target::porosity_after);
    Vector known = loo_predictions(plain, full, 5);
    CHECK((chained.target_predicted - known).cwiseAbs().maxCoeff() < 1e-5);
    // The target itself is affine in the features, so both routes also hit
    // the measured values.
    CHECK((known - *full.targets).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("chained loo stage 1 equals the floored loo salt predictions") {
    Dataset ds = small_synth(12, 0.02, 3);
    ModelConfig plain = ModelConfig::make(Algorithm::plain);
    ChainPrediction chained =
        chain_predict_loo(ds, Target::permeability_after, plain, plain, 7);
    FeatureMatrix salt_fm = build_matrix(ds, Target::salt_concentration);
    Vector loo_salt = loo_predictions(plain, salt_fm, 7);
    int floored = 0;
    for (Eigen::Index i = 0; i < loo_salt.size(); ++i)
        if (loo_salt(i) < 0.0) {
            loo_salt(i) = 0.0;
            ++floored;
        }
    CHECK(chained.salt_predicted == loo_salt);
    CHECK(chained.negative_salt_floored == floored);
}

TEST_CASE("negative stage-1 extrapolations are floored and counted") {
    // Steeper salt relation than the shared fixture: train grains stay
    // non-negative, but the valid grain maximum of 1.0 extrapolates below 0.
    Dataset train = affine_salt_dataset();
    for (CoreSample& s : train.samples) {
        const double salt = 0.3 - 0.35 * s.grain_size_mm;
        s.salt_concentration_gg = salt;
        s.porosity_after_pct =
            porosity_after_desalination(s.porosity_initial_pct, s.density_initial_gcc, salt);
    }
    Dataset query;
    query.provenance = "queries";
    CoreSample normal = train.samples[3];
    normal.sample_id = "Q1";
    CoreSample extreme = train.samples[0];
    extreme.sample_id = "Q2";
    extreme.grain_size_mm = 1.0;  // salt relation extrapolates to 0.3 - 0.35
    query.samples.push_back(normal);
    query.samples.push_back(extreme);

    ModelConfig plain = ModelConfig::make(Algorithm::plain);
    ChainPrediction chained =
        chain_predict(train, query, Target::porosity_after, plain, plain, 11);
    REQUIRE(chained.salt_predicted.size() == 2);
    CHECK(chained.salt_predicted(0) == doctest::Approx(0.3 - 0.35 * 0.4).epsilon(1e-6));
    CHECK(chained.salt_predicted(1) == 0.0);
    CHECK(chained.negative_salt_floored == 1);
    CHECK(chained.target_predicted.allFinite());
}

TEST_CASE("chained prediction rejects the salt target") {
    Dataset ds = affine_salt_dataset();
    ModelConfig plain = ModelConfig::make(Algorithm::plain);
    CHECK_THROWS_AS(
        chain_predict(ds, ds, Target::salt_concentration, plain, plain, 1),
        ValidationError);
    CHECK_THROWS_AS(chain_predict_loo(ds, Target::salt_concentration, plain, plain, 1),
                    ValidationError);
}

TEST_CASE("stage failures name the stage") {
    Dataset ds = small_synth(10, 0.0, 2);
    ModelConfig plain = ModelConfig::make(Algorithm::plain);
    ModelConfig broken = ModelConfig::make(Algorithm::gbm).with("subsample", 0.01);
    try {
        chain_predict(ds, ds, Target::porosity_after, broken, plain, 1);
        FAIL("expected a stage-1 failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage 1") == 0);
    }
    try {
        chain_predict(ds, ds, Target::porosity_after, plain, broken, 1);
        FAIL("expected a stage-2 failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage 2") == 0);
    }
}

TEST_CASE("benchmark rows are independent of the surrounding list") {
    Dataset ds = small_synth(25, 0.05, 4);
    FeatureMatrix fm = build_matrix(ds, Target::porosity_after);
    SplitPlan plan = SplitPlan::shuffle_plan(0.35, 4, 21);
    ModelEntry plain{"plain", ModelConfig::make(Algorithm::plain), ""};
    ModelEntry tree{"tree", ModelConfig::make(Algorithm::tree), ""};

    BenchmarkReport combined = run_benchmark(fm, {plain, tree}, plan);
    BenchmarkReport only_plain = run_benchmark(fm, {plain}, plan);
    BenchmarkReport only_tree = run_benchmark(fm, {tree}, plan);
    REQUIRE(combined.rows.size() == 2);
    CHECK(combined.rows[0].report.r2_mean == only_plain.rows[0].report.r2_mean);
    CHECK(combined.rows[0].report.mse_mean == only_plain.rows[0].report.mse_mean);
    CHECK(combined.rows[1].report.r2_mean == only_tree.rows[0].report.r2_mean);
    CHECK(combined.rows[1].report.mae_mean == only_tree.rows[0].report.mae_mean);
}

TEST_CASE("a failing model leaves the other benchmark rows intact") {
    Dataset ds = small_synth(20, 0.05, 5);
    FeatureMatrix fm = build_matrix(ds, Target::porosity_after);
    SplitPlan plan = SplitPlan::shuffle_plan(0.35, 2, 8);
    std::vector<ModelEntry> models = {
        {"plain", ModelConfig::make(Algorithm::plain), ""},
        {"broken", ModelConfig::make(Algorithm::gbm).with("subsample", 0.01), ""},
        {"tree", ModelConfig::make(Algorithm::tree), "leafy, green"},
    };
    BenchmarkReport report = run_benchmark(fm, models, plan);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].ok);
    CHECK(!report.rows[1].ok);
    CHECK(report.rows[1].error.find("subsample") != std::string::npos);
    CHECK(report.rows[2].ok);

    std::string table = benchmark_table(report);
    CHECK(table.find("model") != std::string::npos);
    CHECK(table.find("failed") != std::string::npos);
    CHECK(table.find("# broken: ") != std::string::npos);
    CHECK(table.find("# tree: leafy, green") != std::string::npos);

    std::string csv = benchmark_csv(report);
    CHECK(csv.rfind("model,r2,r2_std,mae,mae_std,mse,mse_std,r2_excluded,note,error\n", 0) ==
          0);
    // Commas inside free-text cells are made CSV-safe.
    CHECK(csv.find("leafy; green") != std::string::npos);
    CHECK(csv.find("leafy, green") == std::string::npos);

    CHECK_THROWS_AS(run_benchmark(fm, {}, plan), ValidationError);
}

TEST_CASE("approach comparison on clean physics-exact data") {
    Dataset ds = small_synth(60, 0.0, 6);
    ModelConfig plain = ModelConfig::make(Algorithm::plain);
    ComparisonReport report =
        compare_approaches(ds, {Target::porosity_after}, plain, plain, 13);
    REQUIRE(report.per_target.size() == 1);
    CHECK(report.per_target[0].first == Target::porosity_after);
    const ApproachScores& s = report.per_target[0].second;
    // The porosity balance is nearly affine over the narrow density range,
    // so a linear model with measured salts is essentially exact.
    CHECK(s.ml_salt_known.r2 > 0.999);
    CHECK(s.ml_salt_known.r2 <= 1.0);
    // Predicting the salts first can only lose information.
    CHECK(s.ml_salt_predicted.r2 <= s.ml_salt_known.r2 + 1e-9);
    CHECK(s.one_feature_cubic.r2 > 0.9);
    CHECK(report.negative_salt_floored >= 0);

    std::string table = comparison_table(report);
    for (const char* label : {"ml_salt_known", "ml_salt_predicted", "one_feature_cubic"})
        CHECK(table.find(label) != std::string::npos);
    std::string csv = comparison_csv(report);
    CHECK(csv.rfind("target,approach,r2,mae,mse\n", 0) == 0);
    CHECK(csv.find("porosity,ml_salt_known,") != std::string::npos);

    CHECK_THROWS_AS(compare_approaches(ds, {}, plain, plain, 1), ValidationError);
    CHECK_THROWS_AS(
        compare_approaches(ds, {Target::salt_concentration}, plain, plain, 1),
        ValidationError);
}

TEST_CASE("number formatting for report tables") {
    CHECK(format_fixed3(1.23456) == "1.235");
    CHECK(format_fixed3(-0.5) == "-0.500");
    CHECK(format_fixed3(0.0) == "0.000");
    CHECK(format_sig3(0.000123456) == "0.000123");
    CHECK(format_sig3(12345.6) == "1.23e+04");
    CHECK(format_sig3(2.0) == "2");
}

TEST_CASE("table rendering pads all but the last column") {
    std::vector<std::vector<std::string>> rows = {{"a", "bb"}, {"ccc", "d"}};
    CHECK(render_table(rows) == "a    bb\nccc  d\n");
}

}  // TEST_SUITE
