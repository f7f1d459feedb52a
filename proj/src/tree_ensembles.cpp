#include "desalt/tree_ensembles.hpp"

#include "desalt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace desalt {

namespace {

void check_design(const Matrix& X, const Vector& y) {
    if (X.rows() == 0 || X.cols() == 0)
        throw ValidationError("design matrix must be non-empty");
    if (X.rows() != y.size())
        throw ValidationError("design matrix has " + std::to_string(X.rows()) +
                              " rows but target has " + std::to_string(y.size()));
    if (!X.allFinite() || !y.allFinite())
        throw ValidationError("design matrix and target must be finite");
}

/// ceil(frac * n) guarded against the representation of frac * n landing an
/// ulp above an integer.
Eigen::Index ceil_fraction(double frac, Eigen::Index n) {
    return static_cast<Eigen::Index>(std::ceil(frac * static_cast<double>(n) - 1e-9));
}

struct Grower {
    const Matrix& X;
    const Vector& y;
    const std::vector<Eigen::Index>& features;
    int max_depth;
    int min_samples_leaf;
    double leaf_shrinkage;
    RegressionTree tree;

    int make_leaf(const std::vector<Eigen::Index>& rows) {
        double sum = 0.0;
        for (Eigen::Index r : rows) sum += y(r);
        TreeNode node;
        node.value = sum / (static_cast<double>(rows.size()) + leaf_shrinkage);
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    int grow(std::vector<Eigen::Index>& rows, int depth) {
        const auto n = static_cast<Eigen::Index>(rows.size());
        bool constant = true;
        for (Eigen::Index r : rows)
            if (y(r) != y(rows.front())) { constant = false; break; }
        if (depth >= max_depth || constant ||
            n < 2 * static_cast<Eigen::Index>(min_samples_leaf))
            return make_leaf(rows);

        double node_sum = 0.0, node_sumsq = 0.0;
        for (Eigen::Index r : rows) {
            node_sum += y(r);
            node_sumsq += y(r) * y(r);
        }
        const double node_sse = node_sumsq - node_sum * node_sum / static_cast<double>(n);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
        std::vector<std::pair<double, double>> pairs(static_cast<size_t>(n));
        for (Eigen::Index f : features) {
            for (Eigen::Index i = 0; i < n; ++i)
                pairs[static_cast<size_t>(i)] = {X(rows[static_cast<size_t>(i)], f),
                                                 y(rows[static_cast<size_t>(i)])};
            std::sort(pairs.begin(), pairs.end());
            double left_sum = 0.0, left_sumsq = 0.0;
            for (Eigen::Index k = 1; k < n; ++k) {
                const auto& prev = pairs[static_cast<size_t>(k - 1)];
                left_sum += prev.second;
                left_sumsq += prev.second * prev.second;
                if (pairs[static_cast<size_t>(k)].first == prev.first) continue;
                if (k < min_samples_leaf || n - k < min_samples_leaf) continue;
                const double right_sum = node_sum - left_sum;
                const double right_sumsq = node_sumsq - left_sumsq;
                const double sse =
                    (left_sumsq - left_sum * left_sum / static_cast<double>(k)) +
                    (right_sumsq - right_sum * right_sum / static_cast<double>(n - k));
                const double gain = node_sse - sse;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = prev.first +
                                     (pairs[static_cast<size_t>(k)].first - prev.first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return make_leaf(rows);

        std::vector<Eigen::Index> left_rows, right_rows;
        for (Eigen::Index r : rows) {
            if (X(r, best_feature) <= best_threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        TreeNode node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        tree.nodes.push_back(node);
        const int index = static_cast<int>(tree.nodes.size()) - 1;
        const int left = grow(left_rows, depth + 1);
        const int right = grow(right_rows, depth + 1);
        tree.nodes[static_cast<size_t>(index)].left = left;
        tree.nodes[static_cast<size_t>(index)].right = right;
        return index;
    }
};

RegressionTree grow_tree(const Matrix& X, const Vector& y, std::vector<Eigen::Index> rows,
                         const std::vector<Eigen::Index>& features, int max_depth,
                         int min_samples_leaf, double leaf_shrinkage) {
    Grower grower{X, y, features, max_depth, min_samples_leaf, leaf_shrinkage, {}};
    grower.tree.n_features = static_cast<int>(X.cols());
    grower.tree.max_depth = max_depth;
    grower.grow(rows, 0);
    // The root recursion pushes nodes in preorder, so node 0 is the root.
    return std::move(grower.tree);
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    return idx;
}

/// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<Eigen::Index> draw_without_replacement(Eigen::Index n, Eigen::Index k, Rng& rng) {
    std::vector<Eigen::Index> idx = all_indices(n);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index j = i + static_cast<Eigen::Index>(
                                 rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(k));
    return idx;
}

void check_tree_params(int max_depth, int min_samples_leaf) {
    if (max_depth < 1) throw ValidationError("max_depth must be at least 1");
    if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be at least 1");
}

}  // namespace

RegressionTree fit_tree(const Matrix& X, const Vector& y, int max_depth,
                        int min_samples_leaf) {
    check_design(X, y);
    check_tree_params(max_depth, min_samples_leaf);
    return grow_tree(X, y, all_indices(X.rows()), all_indices(X.cols()), max_depth,
                     min_samples_leaf, 0.0);
}

double predict_tree_row(const RegressionTree& t, const Eigen::RowVectorXd& row) {
    if (row.size() != t.n_features)
        throw ValidationError("tree expects " + std::to_string(t.n_features) +
                              " features, got " + std::to_string(row.size()));
    int i = 0;
    while (!t.nodes[static_cast<size_t>(i)].is_leaf()) {
        const TreeNode& node = t.nodes[static_cast<size_t>(i)];
        i = row(node.feature) <= node.threshold ? node.left : node.right;
    }
    return t.nodes[static_cast<size_t>(i)].value;
}

Vector predict_tree(const RegressionTree& t, const Matrix& X) {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_tree_row(t, X.row(i));
    return out;
}

ForestModel fit_forest(const Matrix& X, const Vector& y, int n_estimators, int max_depth,
                       std::uint64_t seed, int min_samples_leaf) {
    check_design(X, y);
    check_tree_params(max_depth, min_samples_leaf);
    if (n_estimators < 1) throw ValidationError("forest needs at least one tree");
    ForestModel model;
    model.n_estimators = n_estimators;
    model.seed = seed;
    model.n_features = static_cast<int>(X.cols());
    const Eigen::Index n = X.rows();
    const std::vector<Eigen::Index> features = all_indices(X.cols());
    model.trees.reserve(static_cast<size_t>(n_estimators));
    for (int i = 0; i < n_estimators; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        std::vector<Eigen::Index> rows(static_cast<size_t>(n));
        for (Eigen::Index r = 0; r < n; ++r)
            rows[static_cast<size_t>(r)] =
                static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        model.trees.push_back(grow_tree(X, y, std::move(rows), features, max_depth,
                                        min_samples_leaf, 0.0));
    }
    return model;
}

Vector predict_forest(const ForestModel& m, const Matrix& X) {
    if (m.trees.empty()) throw ValidationError("forest has no trees");
    Vector out = Vector::Zero(X.rows());
    for (const RegressionTree& t : m.trees) out += predict_tree(t, X);
    return out / static_cast<double>(m.trees.size());
}

GbmModel fit_gbm(const Matrix& X, const Vector& y, int n_estimators, int max_depth,
                 double learning_rate, double subsample, double max_features,
                 double reg_lambda, std::uint64_t seed) {
    check_design(X, y);
    check_tree_params(max_depth, 1);
    if (n_estimators < 0) throw ValidationError("n_estimators must be non-negative");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ValidationError("learning_rate must be in (0, 1]");
    if (!(subsample > 0.0 && subsample <= 1.0))
        throw ValidationError("subsample must be in (0, 1]");
    if (!(max_features > 0.0 && max_features <= 1.0))
        throw ValidationError("max_features must be in (0, 1]");
    if (!(reg_lambda >= 0.0)) throw ValidationError("reg_lambda must be non-negative");

    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Eigen::Index rows_per_round = ceil_fraction(subsample, n);
    if (rows_per_round < 2)
        throw ValidationError("subsample " + std::to_string(subsample) + " leaves " +
                              std::to_string(rows_per_round) +
                              " rows per round; at least 2 required");
    const Eigen::Index feats_per_tree = ceil_fraction(max_features, d);

    GbmModel model;
    model.initial_prediction = y.mean();
    model.learning_rate = learning_rate;
    model.subsample = subsample;
    model.max_features = max_features;
    model.reg_lambda = reg_lambda;
    model.seed = seed;
    model.n_features = static_cast<int>(d);
    model.trees.reserve(static_cast<size_t>(n_estimators));

    Vector current = Vector::Constant(n, model.initial_prediction);
    for (int round = 0; round < n_estimators; ++round) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(round)));
        std::vector<Eigen::Index> rows =
            rows_per_round == n ? all_indices(n)
                                : draw_without_replacement(n, rows_per_round, rng);
        std::vector<Eigen::Index> feats =
            feats_per_tree == d ? all_indices(d)
                                : draw_without_replacement(d, feats_per_tree, rng);
        std::sort(feats.begin(), feats.end());
        Vector residual = y - current;
        model.trees.push_back(grow_tree(X, residual, std::move(rows), feats, max_depth, 1,
                                        reg_lambda));
        current += learning_rate * predict_tree(model.trees.back(), X);
    }
    return model;
}

Vector predict_gbm(const GbmModel& m, const Matrix& X) {
    Vector out = Vector::Constant(X.rows(), m.initial_prediction);
    for (const RegressionTree& t : m.trees) out += m.learning_rate * predict_tree(t, X);
    return out;
}

namespace {

FeatureImportance fscore_over(const std::vector<RegressionTree>& trees, int n_features) {
    FeatureImportance fi;
    fi.counts.assign(static_cast<size_t>(n_features), 0);
    for (const RegressionTree& t : trees)
        for (const TreeNode& node : t.nodes)
            if (!node.is_leaf()) ++fi.counts[static_cast<size_t>(node.feature)];
    fi.ranking.resize(static_cast<size_t>(n_features));
    std::iota(fi.ranking.begin(), fi.ranking.end(), 0);
    std::stable_sort(fi.ranking.begin(), fi.ranking.end(), [&](int a, int b) {
        return fi.counts[static_cast<size_t>(a)] > fi.counts[static_cast<size_t>(b)];
    });
    return fi;
}

}  // namespace

FeatureImportance feature_fscore(const GbmModel& m) {
    return fscore_over(m.trees, m.n_features);
}

FeatureImportance feature_fscore(const ForestModel& m) {
    return fscore_over(m.trees, m.n_features);
}

}  // namespace desalt
