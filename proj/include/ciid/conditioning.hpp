#pragma once

#include "ciid/groups.hpp"
#include "ciid/kmeans.hpp"
#include "ciid/learners.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ciid {

// How a model roster entry sees the training data:
//   Overall       one learner on everything, protected indicators included
//   PerGroup      one learner per protected group, routed at test time
//   SingleGroup   one group's learner applied to the whole population
//   PerCluster    k-means groups (blind to protected columns), routed
//   SingleCluster one cluster's learner applied to the whole population
enum class SchemeKind { Overall, PerGroup, SingleGroup, PerCluster, SingleCluster };

struct TrainingScheme {
    SchemeKind kind = SchemeKind::Overall;
    GroupSpec spec;          // PerGroup / SingleGroup
    GroupKey group = 0;      // SingleGroup
    int cluster_count = 0;   // PerCluster / SingleCluster
    int cluster_index = 0;   // SingleCluster
    bool include_protected_features = true;
    std::string name;
};

// Factories bake in the feature-visibility convention: the overall model
// sees the protected indicators as features, every conditional scheme is
// restricted to the non-protected features.
TrainingScheme overall_scheme();
TrainingScheme per_group_scheme(const GroupSpec& spec);
TrainingScheme single_group_scheme(const GroupSpec& spec, GroupKey group);
TrainingScheme per_cluster_scheme(int k);
TrainingScheme single_cluster_scheme(int k, int index, bool qualify_name = false);

// Standardizer plus k-means fitted on the non-protected feature columns, so
// cluster membership never depends on protected attributes.
struct ClusterRouter {
    RowVector mean;
    RowVector scale;
    KMeansModel kmeans;

    std::vector<int> assign(const Matrix& nonprotected_features) const;
};

ClusterRouter fit_cluster_router(const LabeledDataset& train, int k, std::uint64_t seed);

// Seed stream train_scheme uses for the k-means of cluster schemes; callers
// precomputing a shared router must derive from the same stream.
std::uint64_t scheme_cluster_seed(std::uint64_t seed, int k);

struct ConditionalModel {
    TrainingScheme scheme;
    std::map<std::uint32_t, FittedLearner> learners;  // group key / cluster id / 0
    std::optional<ClusterRouter> router;              // cluster schemes only
    std::vector<EncodedColumn> layout;                // encoded layout seen at training
};

// Trains the scheme's learners. Per-group and per-cluster learners are fit
// on that subset only; groups or clusters that are empty in the training
// data simply get no learner (predict_routed raises UnseenGroupError if a
// test row routes to them). SingleGroup/SingleCluster on an empty subset is
// EmptyTargetGroupError. An optional precomputed router lets an experiment
// share one clustering across cluster schemes; it must come from the same
// train/k/seed for results to be unchanged.
ConditionalModel train_scheme(const LabeledDataset& train, const TrainingScheme& scheme,
                              const LearnerConfig& learner, std::uint64_t seed,
                              const ClusterRouter* shared_router = nullptr);

Labels predict_routed(const ConditionalModel& model, const LabeledDataset& test);

// The experiment roster: overall, every SingleGroup model of every spec,
// one routed PerGroup model per spec, and the SingleCluster models
// Group1..Groupk for each cluster count.
std::vector<TrainingScheme> enumerate_models(const std::vector<GroupSpec>& specs,
                                             const std::vector<int>& cluster_counts);

}  // namespace ciid
