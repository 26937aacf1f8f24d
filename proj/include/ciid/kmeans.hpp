#pragma once

#include "ciid/common.hpp"

#include <cstdint>
#include <vector>

namespace ciid {

struct KMeansModel {
    int k = 0;
    Matrix centroids;  // k x d
    double inertia = 0.0;
};

struct LloydResult {
    Matrix centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
    std::vector<double> inertia_trace;  // one entry per iteration, non-increasing
};

// k-means++ seeding: first centroid uniform over rows, later centroids drawn
// proportional to squared distance from the nearest chosen one.
Matrix kmeans_pp_init(const Matrix& X, int k, std::uint64_t seed);

// Lloyd iteration from given centroids until the assignment reaches a
// fixpoint or max_iters passes. Empty clusters keep their previous centroid.
LloydResult kmeans_lloyd(const Matrix& X, const Matrix& initial_centroids, int max_iters);

// Best of n_init seeded Lloyd runs (strictly lower inertia wins, so earlier
// runs are kept on ties). Deterministic given seed.
KMeansModel kmeans_fit(const Matrix& X, int k, std::uint64_t seed, int max_iters = 100,
                       int n_init = 10);

// Nearest centroid by Euclidean distance; ties go to the lowest cluster id.
std::vector<int> kmeans_assign(const KMeansModel& model, const Matrix& X);

}  // namespace ciid
