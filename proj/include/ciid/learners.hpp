#pragma once

#include "ciid/common.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ciid {

enum class LearnerKind { LogisticRegression, DecisionTree, KNeighbors };

const char* to_string(LearnerKind kind);

struct LogisticRegressionParams {
    double learning_rate = 0.5;
    int iterations = 500;
    double l2 = 1e-4;
};

struct DecisionTreeParams {
    int max_depth = 8;
    int min_samples_leaf = 5;
};

struct KNeighborsParams {
    int k = 5;
};

struct LearnerConfig {
    LearnerKind kind = LearnerKind::DecisionTree;
    LogisticRegressionParams logreg{};
    DecisionTreeParams tree{};
    KNeighborsParams knn{};

    void validate() const;
    std::string describe() const;
};

// Regularized log-loss (mean cross-entropy + 0.5 * l2 * |w|^2, bias
// unpenalized) and its gradient. Exposed as free functions so the gradient
// can be checked against finite differences of the loss.
double logreg_loss(const Matrix& X, const Labels& y, const Vector& w, double b, double l2);
void logreg_gradient(const Matrix& X, const Labels& y, const Vector& w, double b, double l2,
                     Vector& grad_w, double& grad_b);

// Logistic regression standardizes features internally with statistics from
// the fitting data; mean/scale are stored so predict applies the same map.
struct LogRegModel {
    Vector weights;
    double bias = 0.0;
    RowVector feat_mean;
    RowVector feat_scale;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;

    bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // post-order; traversal starts at root
    int root = 0;
};

struct KnnModel {
    Matrix train_X;
    Labels train_y;
    int k = 1;
};

struct FittedLearner {
    LearnerKind kind = LearnerKind::DecisionTree;
    Eigen::Index n_features = 0;
    std::variant<LogRegModel, TreeModel, KnnModel> model;
};

// Deterministic given (config, X, y, seed). All labels identical is fine:
// the learner degenerates to the constant predictor.
FittedLearner fit(const LearnerConfig& config, const Matrix& X, const Labels& y,
                  std::uint64_t seed);

Labels predict(const FittedLearner& learner, const Matrix& X);

}  // namespace ciid
