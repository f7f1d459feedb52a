#pragma once

#include "desalt/common.hpp"

#include <cstdint>
#include <vector>

namespace desalt {

/// Arena-stored node. feature < 0 marks a leaf; internal nodes route
/// values ≤ threshold to the left child.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    int n_features = 0;
    int max_depth = 0;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    int n_estimators = 0;
    std::uint64_t seed = 0;
    int n_features = 0;
};

struct GbmModel {
    double initial_prediction = 0.0;
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    double subsample = 1.0;
    double max_features = 1.0;
    double reg_lambda = 0.0;
    std::uint64_t seed = 0;
    int n_features = 0;
};

/// Split counts per feature across an ensemble, plus the features ranked
/// by count descending (ties by lower index).
struct FeatureImportance {
    std::vector<int> counts;
    std::vector<int> ranking;
};

/// Greedy CART fit under the squared-error criterion. Candidate thresholds
/// are midpoints between consecutive distinct sorted values of a feature.
/// A node becomes a leaf (mean of its targets) at the depth limit, on
/// constant targets, or when no candidate strictly reduces impurity.
/// Ties go to the lowest feature index, then the lowest threshold.
RegressionTree fit_tree(const Matrix& X, const Vector& y, int max_depth,
                        int min_samples_leaf = 1);

Vector predict_tree(const RegressionTree& t, const Matrix& X);
double predict_tree_row(const RegressionTree& t, const Eigen::RowVectorXd& row);

/// Each tree fits a bootstrap resample (n draws with replacement) from its
/// own deterministic per-tree stream. Prediction is the unweighted mean.
ForestModel fit_forest(const Matrix& X, const Vector& y, int n_estimators, int max_depth,
                       std::uint64_t seed, int min_samples_leaf = 1);

Vector predict_forest(const ForestModel& m, const Matrix& X);

/// Gradient boosting on squared loss: F0 = mean(y), then each round fits a
/// tree to the current residuals on ceil(subsample*n) rows drawn without
/// replacement, restricted to ceil(max_features*d) candidate features, with
/// leaf values sum(r)/(count + reg_lambda). reg_lambda = 0 reproduces the
/// unregularized flavor bit for bit.
GbmModel fit_gbm(const Matrix& X, const Vector& y, int n_estimators, int max_depth,
                 double learning_rate, double subsample, double max_features,
                 double reg_lambda, std::uint64_t seed);

Vector predict_gbm(const GbmModel& m, const Matrix& X);

FeatureImportance feature_fscore(const GbmModel& m);
FeatureImportance feature_fscore(const ForestModel& m);

}  // namespace desalt
