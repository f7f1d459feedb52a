#include "desalt/mlp.hpp"
#include "desalt/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace desalt;

namespace {

MlpModel zeroed(Eigen::Index input_dim, const std::vector<int>& hidden) {
    MlpModel m = init_mlp(input_dim, hidden, 1);
    for (Matrix& w : m.weights) w.setZero();
    for (Vector& b : m.biases) b.setZero();
    return m;
}

double loss_of(const MlpModel& m, const Matrix& X, const Vector& y) {
    MlpGradients g;
    return mlp_loss_and_gradients(m, X, y, g);
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("initialization shapes and bounds") {
    MlpModel m = init_mlp(3, {4, 2}, 7);
    REQUIRE(m.layer_sizes == std::vector<Eigen::Index>({3, 4, 2, 1}));
    REQUIRE(m.weights.size() == 3);
    REQUIRE(m.biases.size() == 3);
    CHECK(m.weights[0].rows() == 4);
    CHECK(m.weights[0].cols() == 3);
    CHECK(m.weights[1].rows() == 2);
    CHECK(m.weights[1].cols() == 4);
    CHECK(m.weights[2].rows() == 1);
    CHECK(m.weights[2].cols() == 2);
    for (size_t l = 0; l < m.weights.size(); ++l) {
        const double bound = std::sqrt(
            6.0 / static_cast<double>(m.layer_sizes[l] + m.layer_sizes[l + 1]));
        CHECK(m.weights[l].cwiseAbs().maxCoeff() <= bound);
        CHECK(m.biases[l].cwiseAbs().maxCoeff() == 0.0);
    }
    MlpModel again = init_mlp(3, {4, 2}, 7);
    for (size_t l = 0; l < m.weights.size(); ++l) CHECK(m.weights[l] == again.weights[l]);
    MlpModel other = init_mlp(3, {4, 2}, 8);
    CHECK(m.weights[0] != other.weights[0]);
}

TEST_CASE("zero network outputs zero") {
    MlpModel m = zeroed(2, {3});
    Matrix X(2, 2);
    X << 1.5, -2.0, 0.0, 4.0;
    Vector p = mlp_forward(m, X);
    CHECK(p(0) == 0.0);
    CHECK(p(1) == 0.0);
}

TEST_CASE("single relu unit clips negatives") {
    MlpModel m = zeroed(1, {1});
    m.weights[0](0, 0) = 1.0;
    m.weights[1](0, 0) = 1.0;
    Matrix X(3, 1);
    X << -5.0, 0.0, 5.0;
    Vector p = mlp_forward(m, X);
    CHECK(p(0) == 0.0);
    CHECK(p(1) == 0.0);
    CHECK(p(2) == 5.0);
}

TEST_CASE("biased unit realizes an affine map on its active side") {
    // h = relu(2x + 100) stays active for |x| < 50, so out = h - 100 = 2x.
    MlpModel m = zeroed(1, {1});
    m.weights[0](0, 0) = 2.0;
    m.biases[0](0) = 100.0;
    m.weights[1](0, 0) = 1.0;
    m.biases[1](0) = -100.0;
    Matrix X(3, 1);
    X << -3.0, 0.5, 7.0;
    Vector p = mlp_forward(m, X);
    CHECK(p(0) == doctest::Approx(-6.0));
    CHECK(p(1) == doctest::Approx(1.0));
    CHECK(p(2) == doctest::Approx(14.0));
}

TEST_CASE("perfect fit has zero loss and zero gradients") {
    MlpModel m = zeroed(1, {1});
    m.weights[0](0, 0) = 1.0;
    m.biases[0](0) = 10.0;
    m.weights[1](0, 0) = 3.0;
    m.biases[1](0) = -30.0;
    Matrix X(3, 1);
    X << -1.0, 0.0, 2.0;
    Vector y(3);
    y << -3.0, 0.0, 6.0;  // exactly 3x on the active side
    MlpGradients g;
    double loss = mlp_loss_and_gradients(m, X, y, g);
    CHECK(loss == doctest::Approx(0.0));
    for (const Matrix& gw : g.weights) CHECK(gw.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    for (const Vector& gb : g.biases) CHECK(gb.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("backprop matches central differences") {
    Rng rng(70);
    std::vector<std::vector<int>> architectures = {{3}, {5, 2}, {4, 4, 3}, {1}};
    for (size_t a = 0; a < architectures.size(); ++a) {
        const Eigen::Index n = 6;
        const Eigen::Index d = 3;
        Matrix X(n, d);
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.uniform(-1.5, 1.5);
            y(i) = rng.uniform(-2.0, 2.0);
        }
        MlpModel m = init_mlp(d, architectures[a], 100 + a);
        // Nonzero biases exercise every gradient path.
        for (Vector& b : m.biases)
            for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.3, 0.3);
        MlpGradients analytic;
        mlp_loss_and_gradients(m, X, y, analytic);
        MlpGradients numeric = oracles::mlp_fd_gradients(m, X, y);
        CHECK(oracles::max_gradient_gap(analytic, numeric) < 1e-5);
    }
}

TEST_CASE("loss and gradients are invariant to batch duplication") {
    Rng rng(71);
    Matrix X(5, 2);
    Vector y(5);
    for (Eigen::Index i = 0; i < 5; ++i) {
        X(i, 0) = rng.uniform(-1.0, 1.0);
        X(i, 1) = rng.uniform(-1.0, 1.0);
        y(i) = rng.uniform(-1.0, 1.0);
    }
    Matrix X2(10, 2);
    X2 << X, X;
    Vector y2(10);
    y2 << y, y;
    MlpModel m = init_mlp(2, {4}, 9);
    MlpGradients g1, g2;
    double l1 = mlp_loss_and_gradients(m, X, y, g1);
    double l2 = mlp_loss_and_gradients(m, X2, y2, g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    for (size_t l = 0; l < g1.weights.size(); ++l) {
        CHECK((g1.weights[l] - g2.weights[l]).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((g1.biases[l] - g2.biases[l]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("training drives a linear target to low error") {
    Rng rng(72);
    Matrix X(40, 2);
    Vector y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        X(i, 0) = rng.uniform(-1.0, 1.0);
        X(i, 1) = rng.uniform(-1.0, 1.0);
        y(i) = 0.8 * X(i, 0) - 0.4 * X(i, 1) + 0.2;
    }
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.max_epochs = 2000;
    cfg.tolerance = 0.0;
    MlpModel m = fit_mlp(X, y, {8}, cfg, 5);
    CHECK(loss_of(m, X, y) < 1e-3);
}

TEST_CASE("zero epochs returns the initialization") {
    Matrix X(4, 2);
    X << 0, 1, 1, 0, 1, 1, 0, 0;
    Vector y(4);
    y << 1, 2, 3, 4;
    TrainConfig cfg;
    cfg.max_epochs = 0;
    MlpModel trained = fit_mlp(X, y, {3}, cfg, 21);
    MlpModel fresh = init_mlp(2, {3}, 21);
    for (size_t l = 0; l < trained.weights.size(); ++l) {
        CHECK(trained.weights[l] == fresh.weights[l]);
        CHECK(trained.biases[l] == fresh.biases[l]);
    }
}

TEST_CASE("returned parameters never lose to the initialization") {
    Rng rng(73);
    Matrix X(20, 2);
    Vector y(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        X(i, 0) = rng.uniform(-1.0, 1.0);
        X(i, 1) = rng.uniform(-1.0, 1.0);
        y(i) = rng.uniform(-1.0, 1.0);
    }
    TrainConfig cfg;
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 0.9;  // deliberately twitchy
    cfg.max_epochs = 50;
    cfg.tolerance = 0.0;
    MlpModel trained = fit_mlp(X, y, {6}, cfg, 31);
    MlpModel fresh = init_mlp(2, {6}, 31);
    CHECK(loss_of(trained, X, y) <= loss_of(fresh, X, y) + 1e-12);
}

TEST_CASE("same seed trains bit-identically") {
    Rng rng(74);
    Matrix X(16, 2);
    Vector y(16);
    for (Eigen::Index i = 0; i < 16; ++i) {
        X(i, 0) = rng.uniform(-1.0, 1.0);
        X(i, 1) = rng.uniform(-1.0, 1.0);
        y(i) = X(i, 0) + rng.uniform(-0.1, 0.1);
    }
    TrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.batch_size = 4;
    MlpModel a = fit_mlp(X, y, {4}, cfg, 55);
    MlpModel b = fit_mlp(X, y, {4}, cfg, 55);
    for (size_t l = 0; l < a.weights.size(); ++l) {
        CHECK(a.weights[l] == b.weights[l]);
        CHECK(a.biases[l] == b.biases[l]);
    }
}

TEST_CASE("scaling a single relu unit scales its output") {
    MlpModel m = zeroed(1, {1});
    m.weights[0](0, 0) = 1.5;
    m.weights[1](0, 0) = 1.0;
    Matrix X(1, 1);
    X << 2.0;
    const double base = mlp_forward(m, X)(0);
    m.weights[0](0, 0) = 3.0;
    CHECK(mlp_forward(m, X)(0) == doctest::Approx(2.0 * base));
    m.weights[0](0, 0) = 1.5;
    X << 4.0;
    CHECK(mlp_forward(m, X)(0) == doctest::Approx(2.0 * base));
}

TEST_CASE("divergence raises with the epoch named") {
    Matrix X(4, 1);
    X << 100, 200, 300, 400;
    Vector y(4);
    // Non-zero target mean keeps the output bias moving even if the first
    // update kills every ReLU. The rate is extreme on purpose: the loss has
    // to overflow within the 10-epoch stall window, not merely grow.
    y << 1e6, -1e6, 1e6, 1e6;
    TrainConfig cfg;
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 1e18;
    cfg.max_epochs = 200;
    try {
        fit_mlp(X, y, {8}, cfg, 2);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("input validation") {
    Matrix X(4, 2);
    X << 0, 1, 1, 0, 1, 1, 0, 0;
    Vector y(4);
    y << 1, 2, 3, 4;
    CHECK_THROWS_AS(init_mlp(0, {3}, 1), ValidationError);
    CHECK_THROWS_AS(init_mlp(2, {0}, 1), ValidationError);
    CHECK_THROWS_AS(fit_mlp(X, Vector(3), {3}, TrainConfig{}, 1), ValidationError);
    CHECK_THROWS_AS(fit_mlp(Matrix(0, 2), Vector(0), {3}, TrainConfig{}, 1),
                    ValidationError);
    TrainConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(fit_mlp(X, y, {3}, bad, 1), ValidationError);
    bad = TrainConfig{};
    bad.batch_size = -1;
    CHECK_THROWS_AS(fit_mlp(X, y, {3}, bad, 1), ValidationError);
    MlpModel m = init_mlp(2, {3}, 1);
    CHECK_THROWS_AS(mlp_forward(m, Matrix(2, 5)), ValidationError);
}

}  // TEST_SUITE
