#include "ciid/learners.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace ciid {

const char* to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::LogisticRegression: return "logistic_regression";
        case LearnerKind::DecisionTree: return "decision_tree";
        case LearnerKind::KNeighbors: return "k_neighbors";
    }
    return "?";
}

void LearnerConfig::validate() const {
    switch (kind) {
        case LearnerKind::LogisticRegression:
            if (!(logreg.learning_rate > 0.0))
                throw ConfigError("logistic regression: learning_rate must be > 0");
            if (logreg.iterations < 1)
                throw ConfigError("logistic regression: iterations must be >= 1");
            if (!(logreg.l2 >= 0.0)) throw ConfigError("logistic regression: l2 must be >= 0");
            break;
        case LearnerKind::DecisionTree:
            if (tree.max_depth < 1) throw ConfigError("decision tree: max_depth must be >= 1");
            if (tree.min_samples_leaf < 1)
                throw ConfigError("decision tree: min_samples_leaf must be >= 1");
            break;
        case LearnerKind::KNeighbors:
            if (knn.k < 1) throw ConfigError("k-neighbors: k must be >= 1");
            break;
    }
}

std::string LearnerConfig::describe() const {
    std::ostringstream os;
    os << to_string(kind);
    switch (kind) {
        case LearnerKind::LogisticRegression:
            os << "(lr=" << format_double(logreg.learning_rate)
               << ",iters=" << logreg.iterations << ",l2=" << format_double(logreg.l2) << ")";
            break;
        case LearnerKind::DecisionTree:
            os << "(max_depth=" << tree.max_depth << ",min_leaf=" << tree.min_samples_leaf << ")";
            break;
        case LearnerKind::KNeighbors:
            os << "(k=" << knn.k << ")";
            break;
    }
    return os.str();
}

namespace {

void check_fit_inputs(const Matrix& X, const Labels& y) {
    if (X.rows() != y.size())
        throw DimensionMismatchError("fit: feature rows and label count differ");
    if (X.rows() < 1) throw DimensionMismatchError("fit: need at least one sample");
    if (!X.allFinite()) throw DegenerateDataError("fit: non-finite feature values");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0 && y[i] != 1) throw DegenerateDataError("fit: labels must be 0 or 1");
}

double stable_softplus(double z) {
    // log(1 + exp(z)) without overflow.
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

Vector sigmoid(const Vector& z) {
    return z.unaryExpr([](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
}

}  // namespace

double logreg_loss(const Matrix& X, const Labels& y, const Vector& w, double b, double l2) {
    const Vector z = (X * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        loss += stable_softplus(z[i]) - static_cast<double>(y[i]) * z[i];
    loss /= static_cast<double>(X.rows());
    return loss + 0.5 * l2 * w.squaredNorm();
}

void logreg_gradient(const Matrix& X, const Labels& y, const Vector& w, double b, double l2,
                     Vector& grad_w, double& grad_b) {
    const double m = static_cast<double>(X.rows());
    const Vector z = (X * w).array() + b;
    const Vector residual = sigmoid(z) - y.cast<double>();
    grad_w = X.transpose() * residual / m + l2 * w;
    grad_b = residual.sum() / m;
}

namespace {

LogRegModel fit_logreg(const LogisticRegressionParams& params, const Matrix& X, const Labels& y) {
    LogRegModel model;
    model.feat_mean = X.colwise().mean();
    RowVector var = (X.rowwise() - model.feat_mean).array().square().colwise().mean();
    model.feat_scale = var.array().sqrt();
    for (Eigen::Index j = 0; j < model.feat_scale.size(); ++j)
        if (model.feat_scale[j] == 0.0) model.feat_scale[j] = 1.0;  // constant column

    const Matrix Xs =
        (X.rowwise() - model.feat_mean).array().rowwise() / model.feat_scale.array();

    model.weights = Vector::Zero(X.cols());
    model.bias = 0.0;
    Vector grad_w(X.cols());
    double grad_b = 0.0;
    for (int it = 0; it < params.iterations; ++it) {
        logreg_gradient(Xs, y, model.weights, model.bias, params.l2, grad_w, grad_b);
        model.weights -= params.learning_rate * grad_w;
        model.bias -= params.learning_rate * grad_b;
    }
    return model;
}

// ---- CART with Gini impurity, binary labels ----

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
};

double gini_binary(std::int64_t n0, std::int64_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p1 = static_cast<double>(n1) / n;
    return 2.0 * p1 * (1.0 - p1);
}

struct TreeBuilder {
    const Matrix& X;
    const Labels& y;
    const DecisionTreeParams& params;
    std::vector<TreeNode> nodes;

    int make_leaf(std::int64_t n0, std::int64_t n1) {
        TreeNode leaf;
        leaf.label = n1 > n0 ? 1 : 0;  // tie predicts 0
        nodes.push_back(leaf);
        return static_cast<int>(nodes.size()) - 1;
    }

    SplitChoice best_split(const std::vector<int>& rows, std::int64_t n0, std::int64_t n1) {
        SplitChoice best;
        const std::int64_t n = n0 + n1;
        const double parent = gini_binary(n0, n1);
        std::vector<std::pair<double, int>> column(rows.size());
        for (int f = 0; f < X.cols(); ++f) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                column[i] = {X(rows[i], f), y[rows[i]]};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::int64_t left0 = 0, left1 = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                if (column[i].second == 1)
                    ++left1;
                else
                    ++left0;
                if (column[i].first == column[i + 1].first) continue;
                const std::int64_t left = left0 + left1;
                const std::int64_t right = n - left;
                if (left < params.min_samples_leaf || right < params.min_samples_leaf) continue;
                const double weighted =
                    (static_cast<double>(left) * gini_binary(left0, left1) +
                     static_cast<double>(right) * gini_binary(n0 - left0, n1 - left1)) /
                    static_cast<double>(n);
                const double gain = parent - weighted;
                // Strict improvement keeps the lowest feature index and the
                // lowest threshold on exact ties.
                if (gain > best.gain) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (column[i].first + column[i + 1].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    int build(const std::vector<int>& rows, int depth) {
        std::int64_t n0 = 0, n1 = 0;
        for (int r : rows) (y[r] == 1 ? n1 : n0)++;
        // Impure nodes split whenever a feasible split exists, even at zero
        // gain; recursion still terminates because children shrink strictly.
        if (n0 == 0 || n1 == 0 || depth >= params.max_depth ||
            static_cast<std::int64_t>(rows.size()) < 2 * params.min_samples_leaf)
            return make_leaf(n0, n1);

        const SplitChoice split = best_split(rows, n0, n1);
        if (!split.found) return make_leaf(n0, n1);

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (X(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);

        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        TreeNode node;
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
    }
};

TreeModel fit_tree(const DecisionTreeParams& params, const Matrix& X, const Labels& y) {
    TreeBuilder builder{X, y, params, {}};
    std::vector<int> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    TreeModel model;
    model.root = builder.build(rows, 0);
    model.nodes = std::move(builder.nodes);
    return model;
}

int tree_predict_row(const TreeModel& model, const RowVector& x) {
    int node = model.root;
    for (;;) {
        const TreeNode& cur = model.nodes[static_cast<std::size_t>(node)];
        if (cur.is_leaf()) return cur.label;
        node = x[cur.feature] <= cur.threshold ? cur.left : cur.right;
    }
}

int knn_predict_row(const KnnModel& model, const RowVector& x) {
    const Eigen::Index m = model.train_X.rows();
    const Vector d2 = (model.train_X.rowwise() - x).rowwise().squaredNorm();
    const std::int64_t kk = std::min<std::int64_t>(model.k, m);  // clamp to train size
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + kk, order.end(), [&](int a, int b) {
        if (d2[a] != d2[b]) return d2[a] < d2[b];
        return a < b;  // distance ties resolved by train index
    });
    std::int64_t votes1 = 0;
    for (std::int64_t i = 0; i < kk; ++i) votes1 += model.train_y[order[static_cast<std::size_t>(i)]];
    return 2 * votes1 > kk ? 1 : 0;  // vote tie predicts 0
}

}  // namespace

FittedLearner fit(const LearnerConfig& config, const Matrix& X, const Labels& y,
                  std::uint64_t seed) {
    (void)seed;  // present for interface uniformity; no learner draws randomness
    config.validate();
    check_fit_inputs(X, y);
    FittedLearner out;
    out.kind = config.kind;
    out.n_features = X.cols();
    switch (config.kind) {
        case LearnerKind::LogisticRegression:
            out.model = fit_logreg(config.logreg, X, y);
            break;
        case LearnerKind::DecisionTree:
            out.model = fit_tree(config.tree, X, y);
            break;
        case LearnerKind::KNeighbors:
            out.model = KnnModel{X, y, config.knn.k};
            break;
    }
    return out;
}

Labels predict(const FittedLearner& learner, const Matrix& X) {
    if (X.cols() != learner.n_features)
        throw DimensionMismatchError("predict: feature count differs from fit");
    Labels out(X.rows());
    if (const auto* lr = std::get_if<LogRegModel>(&learner.model)) {
        const Matrix Xs = (X.rowwise() - lr->feat_mean).array().rowwise() / lr->feat_scale.array();
        const Vector z = (Xs * lr->weights).array() + lr->bias;
        for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? 1 : 0;
        return out;
    }
    if (const auto* tree = std::get_if<TreeModel>(&learner.model)) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = tree_predict_row(*tree, X.row(i));
        return out;
    }
    const auto& knn = std::get<KnnModel>(learner.model);
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = knn_predict_row(knn, X.row(i));
    return out;
}

}  // namespace ciid
