#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ciid/kmeans.hpp"
#include "ciid/learners.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace ciid;

namespace {

LearnerConfig logreg_config(double lr, int iters, double l2) {
    LearnerConfig cfg;
    cfg.kind = LearnerKind::LogisticRegression;
    cfg.logreg = {lr, iters, l2};
    return cfg;
}

LearnerConfig tree_config(int max_depth, int min_leaf) {
    LearnerConfig cfg;
    cfg.kind = LearnerKind::DecisionTree;
    cfg.tree = {max_depth, min_leaf};
    return cfg;
}

LearnerConfig knn_config(int k) {
    LearnerConfig cfg;
    cfg.kind = LearnerKind::KNeighbors;
    cfg.knn = {k};
    return cfg;
}

double train_accuracy(const FittedLearner& model, const Matrix& X, const Labels& y) {
    const Labels pred = predict(model, X);
    double correct = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) correct += pred[i] == y[i];
    return correct / static_cast<double>(y.size());
}

Matrix xor_features() {
    Matrix X(4, 2);
    X << 0, 0, 0, 1, 1, 0, 1, 1;
    return X;
}

Labels xor_labels() {
    Labels y(4);
    y << 0, 1, 1, 0;
    return y;
}

}  // namespace

TEST_CASE("logistic regression separates 1-d separable data") {
    Matrix X(8, 1);
    X << -2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2;
    Labels y(8);
    y << 0, 0, 0, 0, 1, 1, 1, 1;
    const auto model = fit(logreg_config(0.5, 2000, 1e-6), X, y, 1);
    CHECK(train_accuracy(model, X, y) == 1.0);
}

TEST_CASE("all-identical labels produce the constant predictor") {
    Matrix X(6, 2);
    X << 0, 1, 1, 0, 2, 2, -1, 3, 0.5, 0.5, 4, -2;
    Labels y = Labels::Ones(6);
    Matrix fresh(2, 2);
    fresh << 9, 9, -9, -9;
    for (const auto& cfg : {logreg_config(0.5, 200, 1e-4), tree_config(4, 1), knn_config(3)}) {
        const auto model = fit(cfg, X, y, 7);
        CHECK(predict(model, X).minCoeff() == 1);
        CHECK(predict(model, fresh).minCoeff() == 1);
    }
}

TEST_CASE("logistic regression gradient matches central finite differences") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix X(12, 4);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = dist(rng);
    Labels y(12);
    for (Eigen::Index i = 0; i < 12; ++i) y[i] = (dist(rng) > 0.0) ? 1 : 0;

    for (int trial = 0; trial < 5; ++trial) {
        Vector w(4);
        for (int j = 0; j < 4; ++j) w[j] = dist(rng);
        const double b = dist(rng);
        const double l2 = 0.1;

        Vector grad_w;
        double grad_b = 0.0;
        logreg_gradient(X, y, w, b, l2, grad_w, grad_b);

        const double h = 1e-6;
        for (int j = 0; j < 4; ++j) {
            Vector wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (logreg_loss(X, y, wp, b, l2) - logreg_loss(X, y, wm, b, l2)) / (2 * h);
            REQUIRE(grad_w[j] == doctest::Approx(fd).epsilon(1e-5));
        }
        const double fd_b =
            (logreg_loss(X, y, w, b + h, l2) - logreg_loss(X, y, w, b - h, l2)) / (2 * h);
        REQUIRE(grad_b == doctest::Approx(fd_b).epsilon(1e-5));
    }
}

TEST_CASE("logistic regression with forced weights follows the sigmoid") {
    FittedLearner learner;
    learner.kind = LearnerKind::LogisticRegression;
    learner.n_features = 2;
    LogRegModel model;
    model.weights = Vector(2);
    model.weights << 2.0, -1.0;
    model.bias = 0.5;
    model.feat_mean = RowVector::Zero(2);
    model.feat_scale = RowVector::Ones(2);
    learner.model = model;

    Matrix X(3, 2);
    X << 1.0, 1.0,      // z = 1.5, sigma = 0.818 -> 1
        -1.0, 0.4,      // z = -1.9, sigma = 0.130 -> 0
        0.0, 0.5;       // z = 0, sigma = 0.5 exactly -> 0
    const Labels pred = predict(learner, X);
    CHECK(pred[0] == 1);
    CHECK(pred[1] == 0);
    CHECK(pred[2] == 0);
}

TEST_CASE("depth-2 tree shatters the xor pattern") {
    const Matrix X = xor_features();
    const Labels y = xor_labels();

    // Brute-force oracle: some depth-2 axis-aligned tree reaches accuracy 1.
    double best = 0.0;
    for (int rf = 0; rf < 2; ++rf)
        for (int lf = 0; lf < 2; ++lf)
            for (int rgt = 0; rgt < 2; ++rgt)
                for (int mask = 0; mask < 16; ++mask) {
                    double correct = 0;
                    for (int i = 0; i < 4; ++i) {
                        const bool go_left = X(i, rf) <= 0.5;
                        const bool child_left = X(i, go_left ? lf : rgt) <= 0.5;
                        const int slot = (go_left ? 0 : 2) + (child_left ? 0 : 1);
                        const int label = (mask >> slot) & 1;
                        correct += label == y[i];
                    }
                    best = std::max(best, correct / 4.0);
                }
    REQUIRE(best == 1.0);

    const auto model = fit(tree_config(2, 1), X, y, 3);
    CHECK(train_accuracy(model, X, y) == 1.0);
    const auto shallow = fit(tree_config(1, 1), X, y, 3);
    CHECK(train_accuracy(shallow, X, y) < 1.0);
}

TEST_CASE("tree training accuracy is monotone in max depth") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix X(48, 3);
    Labels y(48);
    for (int i = 0; i < 48; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = unif(rng);
        const double signal = X(i, 0) + 0.5 * X(i, 1) - X(i, 2) + 0.3 * unif(rng);
        y[i] = signal > 0.4 ? 1 : 0;
    }
    double prev = 0.0;
    for (int depth = 1; depth <= 7; ++depth) {
        const double acc = train_accuracy(fit(tree_config(depth, 1), X, y, 0), X, y);
        CHECK(acc >= prev);
        prev = acc;
    }
}

TEST_CASE("tree honors min_samples_leaf") {
    Matrix X(4, 1);
    X << 0, 1, 2, 3;
    Labels y(4);
    y << 0, 0, 1, 1;
    // min leaf 3 forbids every split of 4 rows; majority tie falls to 0.
    const auto stump = fit(tree_config(5, 3), X, y, 0);
    CHECK(predict(stump, X).sum() == 0);
    const auto split = fit(tree_config(5, 2), X, y, 0);
    CHECK(train_accuracy(split, X, y) == 1.0);
}

TEST_CASE("knn predicts a training point's own label with k=1") {
    Matrix X(4, 2);
    X << 0, 0, 1, 0, 0, 1, 1, 1;
    Labels y(4);
    y << 0, 1, 0, 1;
    const auto model = fit(knn_config(1), X, y, 0);
    const Labels pred = predict(model, X);
    for (int i = 0; i < 4; ++i) CHECK(pred[i] == y[i]);
}

TEST_CASE("knn vote ties break toward label 0 and k clamps to train size") {
    Matrix X(2, 1);
    X << 0, 2;
    Labels y(2);
    y << 1, 0;
    const auto model = fit(knn_config(2), X, y, 0);
    Matrix q(1, 1);
    q << 1.0;  // equidistant, one vote each
    CHECK(predict(model, q)[0] == 0);

    const auto clamped = fit(knn_config(10), X, y, 0);
    CHECK(predict(clamped, q)[0] == 0);
}

TEST_CASE("fit and predict validate dimensions and data") {
    Matrix X(3, 2);
    X << 0, 1, 1, 0, 1, 1;
    Labels y2(2);
    y2 << 0, 1;
    CHECK_THROWS_AS(fit(tree_config(2, 1), X, y2, 0), DimensionMismatchError);

    Labels y(3);
    y << 0, 1, 2;
    CHECK_THROWS_AS(fit(tree_config(2, 1), X, y, 0), DegenerateDataError);

    Matrix bad = X;
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    Labels ok(3);
    ok << 0, 1, 1;
    CHECK_THROWS_AS(fit(knn_config(1), bad, ok, 0), DegenerateDataError);

    const auto model = fit(tree_config(2, 1), X, ok, 0);
    Matrix wrong(2, 3);
    wrong.setZero();
    CHECK_THROWS_AS(predict(model, wrong), DimensionMismatchError);
}

TEST_CASE("predict is pure and fit is deterministic") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix X(30, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = dist(rng);
    Labels y(30);
    for (int i = 0; i < 30; ++i) y[i] = dist(rng) > 0 ? 1 : 0;

    for (const auto& cfg : {logreg_config(0.3, 150, 1e-3), tree_config(4, 2), knn_config(3)}) {
        const auto a = fit(cfg, X, y, 42);
        const auto b = fit(cfg, X, y, 42);
        CHECK(predict(a, X) == predict(b, X));
        CHECK(predict(a, X) == predict(a, X));
    }
}

TEST_CASE("kmeans separates two well-separated clouds") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(0.0, 0.2);
    Matrix X(12, 2);
    for (int i = 0; i < 6; ++i) X.row(i) << dist(rng), dist(rng);
    for (int i = 6; i < 12; ++i) X.row(i) << 10 + dist(rng), 10 + dist(rng);
    const auto model = kmeans_fit(X, 2, 9);
    const auto assign = kmeans_assign(model, X);
    for (int i = 1; i < 6; ++i) CHECK(assign[static_cast<std::size_t>(i)] == assign[0]);
    for (int i = 7; i < 12; ++i) CHECK(assign[static_cast<std::size_t>(i)] == assign[6]);
    CHECK(assign[0] != assign[6]);
}

TEST_CASE("kmeans with k equal to row count reaches zero inertia") {
    Matrix X(5, 2);
    X << 0, 0, 1, 0, 0, 1, 5, 5, -3, 2;
    const auto model = kmeans_fit(X, 5, 3);
    CHECK(model.inertia == 0.0);
}

namespace {

double exhaustive_two_partition_optimum(const Matrix& X) {
    const int n = static_cast<int>(X.rows());
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
        RowVector mean_a = RowVector::Zero(X.cols());
        RowVector mean_b = RowVector::Zero(X.cols());
        int na = 0, nb = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1 << i)) {
                mean_a += X.row(i);
                ++na;
            } else {
                mean_b += X.row(i);
                ++nb;
            }
        }
        mean_a /= na;
        mean_b /= nb;
        double inertia = 0.0;
        for (int i = 0; i < n; ++i)
            inertia += (X.row(i) - ((mask & (1 << i)) ? mean_a : mean_b)).squaredNorm();
        best = std::min(best, inertia);
    }
    return best;
}

}  // namespace

TEST_CASE("kmeans inertia matches the exhaustive-partition optimum on tiny data") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::uniform_int_distribution<int> size_dist(4, 8);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = size_dist(rng);
        Matrix X(n, 2);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(rng);
        const double oracle = exhaustive_two_partition_optimum(X);
        const auto model = kmeans_fit(X, 2, 1000 + static_cast<std::uint64_t>(trial));
        REQUIRE(model.inertia == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("lloyd trace is non-increasing and ends at an assignment fixpoint") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix X(40, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = dist(rng);
    const Matrix init = kmeans_pp_init(X, 4, 8);
    const auto run = kmeans_lloyd(X, init, 200);
    for (std::size_t i = 1; i < run.inertia_trace.size(); ++i)
        CHECK(run.inertia_trace[i] <= run.inertia_trace[i - 1] + 1e-9);

    KMeansModel model{4, run.centroids, run.inertia};
    CHECK(kmeans_assign(model, X) == run.assignment);
}

TEST_CASE("kmeans_assign matches the brute-force nearest centroid") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    Matrix X(25, 2);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(rng);
    const auto model = kmeans_fit(X, 3, 4);

    Matrix queries(50, 2);
    for (Eigen::Index i = 0; i < queries.size(); ++i) queries.data()[i] = unif(rng);
    const auto assign = kmeans_assign(model, queries);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 3; ++c) {
            const double d2 = (queries.row(i) - model.centroids.row(c)).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        REQUIRE(assign[static_cast<std::size_t>(i)] == best);
    }
}

TEST_CASE("kmeans_assign tie-breaks toward the lowest cluster id") {
    KMeansModel model;
    model.k = 2;
    model.centroids = Matrix(2, 2);
    model.centroids << 0, 0, 2, 0;
    Matrix q(2, 2);
    q << 1, 0,  // exact midpoint
        2, 0;   // centroid itself
    const auto assign = kmeans_assign(model, q);
    CHECK(assign[0] == 0);
    CHECK(assign[1] == 1);
}

TEST_CASE("kmeans validates inputs") {
    Matrix X(2, 2);
    X << 0, 0, 1, 1;
    CHECK_THROWS_AS(kmeans_fit(X, 3, 0), TooFewSamplesError);
    CHECK_THROWS_AS(kmeans_fit(X, 1, 0), ConfigError);
    KMeansModel model;
    model.k = 2;
    model.centroids = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(kmeans_assign(model, X), DimensionMismatchError);
}
