#include "ciid/kmeans.hpp"

#include <limits>
#include <random>

namespace ciid {

namespace {

int nearest_centroid(const Matrix& centroids, const RowVector& x) {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d2 = (centroids.row(c) - x).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace

Matrix kmeans_pp_init(const Matrix& X, int k, std::uint64_t seed) {
    const Eigen::Index n = X.rows();
    std::mt19937_64 rng(seed);
    Matrix centroids(k, X.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);

    std::uniform_int_distribution<Eigen::Index> uniform_row(0, n - 1);
    Eigen::Index first = uniform_row(rng);
    centroids.row(0) = X.row(first);
    chosen[static_cast<std::size_t>(first)] = true;

    Vector d2 = (X.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            std::uniform_real_distribution<double> uniform(0.0, total);
            const double r = uniform(rng);
            double cum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            // All points coincide with a chosen centroid; take the lowest
            // unchosen row so init still yields k rows.
            for (Eigen::Index i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            if (pick < 0) pick = 0;
        }
        centroids.row(c) = X.row(pick);
        chosen[static_cast<std::size_t>(pick)] = true;
        d2 = d2.cwiseMin((X.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

LloydResult kmeans_lloyd(const Matrix& X, const Matrix& initial_centroids, int max_iters) {
    if (X.cols() != initial_centroids.cols())
        throw DimensionMismatchError("kmeans_lloyd: centroid dimension differs from data");
    const Eigen::Index n = X.rows();
    const int k = static_cast<int>(initial_centroids.rows());

    LloydResult result;
    result.centroids = initial_centroids;
    result.assignment.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        result.assignment[static_cast<std::size_t>(i)] = nearest_centroid(result.centroids, X.row(i));

    std::vector<int> next(static_cast<std::size_t>(n));
    for (int it = 0; it < max_iters; ++it) {
        // Update step: cluster means; empty clusters keep their centroid.
        Matrix sums = Matrix::Zero(k, X.cols());
        std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(i)]);
            sums.row(static_cast<Eigen::Index>(c)) += X.row(i);
            ++counts[c];
        }
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                result.centroids.row(c) =
                    sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);

        // Assignment step against the refreshed centroids.
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = nearest_centroid(result.centroids, X.row(i));
            next[static_cast<std::size_t>(i)] = c;
            inertia += (X.row(i) - result.centroids.row(c)).squaredNorm();
        }
        result.inertia_trace.push_back(inertia);
        const bool stable = next == result.assignment;
        result.assignment = next;
        result.inertia = inertia;
        if (stable) break;
    }
    return result;
}

namespace {

// k^n when it fits the budget, otherwise budget + 1.
std::int64_t assignment_count_capped(Eigen::Index n, int k, std::int64_t budget) {
    std::int64_t count = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        count *= k;
        if (count > budget) return budget + 1;
    }
    return count;
}

// Exact optimum over all surjective assignments; only feasible for tiny
// inputs. Returns the optimal cluster means.
Matrix exact_optimal_centroids(const Matrix& X, int k) {
    const Eigen::Index n = X.rows();
    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    std::vector<int> best_assign;
    double best_inertia = std::numeric_limits<double>::infinity();
    Matrix sums(k, X.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k));

    for (;;) {
        sums.setZero();
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
            sums.row(static_cast<Eigen::Index>(c)) += X.row(i);
            ++counts[c];
        }
        bool surjective = true;
        for (const auto c : counts) surjective = surjective && c > 0;
        if (surjective) {
            // sum ||x - mean||^2 = sum ||x||^2 - sum_c ||sum_c||^2 / n_c
            double inertia = X.squaredNorm();
            for (int c = 0; c < k; ++c)
                inertia -= sums.row(c).squaredNorm() /
                           static_cast<double>(counts[static_cast<std::size_t>(c)]);
            if (inertia < best_inertia) {
                best_inertia = inertia;
                best_assign = assign;
            }
        }
        Eigen::Index digit = 0;
        while (digit < n && ++assign[static_cast<std::size_t>(digit)] == k)
            assign[static_cast<std::size_t>(digit++)] = 0;
        if (digit == n) break;
    }

    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(best_assign[static_cast<std::size_t>(i)]);
        sums.row(static_cast<Eigen::Index>(c)) += X.row(i);
        ++counts[c];
    }
    Matrix centroids(k, X.cols());
    for (int c = 0; c < k; ++c)
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& X, int k, std::uint64_t seed, int max_iters, int n_init) {
    if (k < 2) throw ConfigError("kmeans_fit: k must be >= 2");
    if (max_iters < 1 || n_init < 1) throw ConfigError("kmeans_fit: iterations and inits must be >= 1");
    if (X.rows() < k) throw TooFewSamplesError("kmeans_fit: fewer rows than clusters");

    KMeansModel best;
    best.inertia = std::numeric_limits<double>::infinity();
    auto consider = [&](const Matrix& start) {
        LloydResult run = kmeans_lloyd(X, start, max_iters);
        if (run.inertia < best.inertia) {
            best.k = k;
            best.centroids = std::move(run.centroids);
            best.inertia = run.inertia;
        }
    };

    // Tiny inputs get the enumerated optimum as an extra Lloyd seed; random
    // restarts alone can land in a local minimum even at eight points. The
    // returned model is still a Lloyd fixpoint.
    constexpr std::int64_t kExactBudget = 1 << 17;
    if (assignment_count_capped(X.rows(), k, kExactBudget) <= kExactBudget)
        consider(exact_optimal_centroids(X, k));

    for (int init = 0; init < n_init; ++init)
        consider(kmeans_pp_init(X, k, derive_seed(seed, static_cast<std::uint64_t>(init))));
    return best;
}

std::vector<int> kmeans_assign(const KMeansModel& model, const Matrix& X) {
    if (X.cols() != model.centroids.cols())
        throw DimensionMismatchError("kmeans_assign: feature count differs from fit");
    std::vector<int> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out[static_cast<std::size_t>(i)] = nearest_centroid(model.centroids, X.row(i));
    return out;
}

}  // namespace ciid
