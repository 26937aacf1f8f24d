#include "ciid/conditioning.hpp"

#include <algorithm>
#include <sstream>

namespace ciid {

TrainingScheme overall_scheme() {
    TrainingScheme s;
    s.kind = SchemeKind::Overall;
    s.include_protected_features = true;
    s.name = "overall";
    return s;
}

TrainingScheme per_group_scheme(const GroupSpec& spec) {
    TrainingScheme s;
    s.kind = SchemeKind::PerGroup;
    s.spec = spec;
    s.include_protected_features = false;
    s.name = "ciid_" + spec.name();
    return s;
}

TrainingScheme single_group_scheme(const GroupSpec& spec, GroupKey group) {
    TrainingScheme s;
    s.kind = SchemeKind::SingleGroup;
    s.spec = spec;
    s.group = group;
    s.include_protected_features = false;
    s.name = subgroup_name(spec, group);
    return s;
}

TrainingScheme per_cluster_scheme(int k) {
    TrainingScheme s;
    s.kind = SchemeKind::PerCluster;
    s.cluster_count = k;
    s.include_protected_features = false;
    s.name = "blind_ciid_k" + std::to_string(k);
    return s;
}

TrainingScheme single_cluster_scheme(int k, int index, bool qualify_name) {
    TrainingScheme s;
    s.kind = SchemeKind::SingleCluster;
    s.cluster_count = k;
    s.cluster_index = index;
    s.include_protected_features = false;
    std::ostringstream name;
    if (qualify_name) name << "k" << k << "_";
    name << "Group" << index + 1;
    s.name = name.str();
    return s;
}

std::vector<int> ClusterRouter::assign(const Matrix& nonprotected_features) const {
    const Matrix standardized =
        (nonprotected_features.rowwise() - mean).array().rowwise() / scale.array();
    return kmeans_assign(kmeans, standardized);
}

ClusterRouter fit_cluster_router(const LabeledDataset& train, int k, std::uint64_t seed) {
    const Matrix features = feature_view(train, false);
    ClusterRouter router;
    router.mean = features.colwise().mean();
    RowVector var = (features.rowwise() - router.mean).array().square().colwise().mean();
    router.scale = var.array().sqrt();
    for (Eigen::Index j = 0; j < router.scale.size(); ++j)
        if (router.scale[j] == 0.0) router.scale[j] = 1.0;
    const Matrix standardized =
        (features.rowwise() - router.mean).array().rowwise() / router.scale.array();
    router.kmeans = kmeans_fit(standardized, k, seed);
    return router;
}

namespace {

Matrix rows_of(const Matrix& features, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    return out;
}

Labels labels_of(const Labels& y, const std::vector<Eigen::Index>& rows) {
    Labels out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
    return out;
}

}  // namespace

std::uint64_t scheme_cluster_seed(std::uint64_t seed, int k) {
    return derive_seed(seed, 0x10000u + static_cast<std::uint64_t>(k));
}

ConditionalModel train_scheme(const LabeledDataset& train, const TrainingScheme& scheme,
                              const LearnerConfig& learner, std::uint64_t seed,
                              const ClusterRouter* shared_router) {
    if (train.rows() < 1) throw TooFewSamplesError("train_scheme: empty training set");
    ConditionalModel model;
    model.scheme = scheme;
    model.layout = train.columns;

    const Matrix features = feature_view(train, scheme.include_protected_features);

    switch (scheme.kind) {
        case SchemeKind::Overall:
            model.learners.emplace(0u, fit(learner, features, train.y, derive_seed(seed, 0)));
            break;

        case SchemeKind::PerGroup: {
            for (const auto& [key, rows] : group_rows(train, scheme.spec)) {
                if (rows.empty()) continue;  // routing to it later raises UnseenGroupError
                model.learners.emplace(
                    key, fit(learner, rows_of(features, rows), labels_of(train.y, rows),
                             derive_seed(seed, key)));
            }
            break;
        }

        case SchemeKind::SingleGroup: {
            const auto rows = group_rows(train, scheme.spec).at(scheme.group);
            if (rows.empty())
                throw EmptyTargetGroupError("train_scheme: group " +
                                            subgroup_name(scheme.spec, scheme.group) +
                                            " has no training rows");
            // Same derived seed as the PerGroup learner of this group, so the
            // routed model and its isolated parts coincide exactly.
            model.learners.emplace(0u,
                                   fit(learner, rows_of(features, rows), labels_of(train.y, rows),
                                       derive_seed(seed, scheme.group)));
            break;
        }

        case SchemeKind::PerCluster:
        case SchemeKind::SingleCluster: {
            const int k = scheme.cluster_count;
            ClusterRouter router = shared_router
                                       ? *shared_router
                                       : fit_cluster_router(train, k, scheme_cluster_seed(seed, k));
            const std::vector<int> assignment = router.assign(feature_view(train, false));
            std::map<std::uint32_t, std::vector<Eigen::Index>> by_cluster;
            for (int c = 0; c < k; ++c) by_cluster[static_cast<std::uint32_t>(c)] = {};
            for (std::size_t i = 0; i < assignment.size(); ++i)
                by_cluster[static_cast<std::uint32_t>(assignment[i])].push_back(
                    static_cast<Eigen::Index>(i));

            if (scheme.kind == SchemeKind::SingleCluster) {
                const auto& rows = by_cluster.at(static_cast<std::uint32_t>(scheme.cluster_index));
                if (rows.empty())
                    throw EmptyTargetGroupError("train_scheme: cluster " +
                                                std::to_string(scheme.cluster_index + 1) +
                                                " has no training rows");
                model.learners.emplace(
                    0u, fit(learner, rows_of(features, rows), labels_of(train.y, rows),
                            derive_seed(seed, 0x20000u + static_cast<std::uint64_t>(
                                                             scheme.cluster_index))));
            } else {
                model.router = std::move(router);
                for (const auto& [cluster, rows] : by_cluster) {
                    if (rows.empty()) continue;
                    model.learners.emplace(
                        cluster, fit(learner, rows_of(features, rows), labels_of(train.y, rows),
                                     derive_seed(seed, 0x20000u + cluster)));
                }
            }
            break;
        }
    }
    return model;
}

namespace {

void check_layout(const ConditionalModel& model, const LabeledDataset& test) {
    if (test.columns.size() != model.layout.size())
        throw DimensionMismatchError("predict_routed: encoded layout differs from training");
    for (std::size_t j = 0; j < test.columns.size(); ++j)
        if (test.columns[j].name != model.layout[j].name)
            throw DimensionMismatchError("predict_routed: encoded column mismatch at " +
                                         test.columns[j].name);
}

// Scores each row with the learner chosen by route(row); batches rows per
// learner so per-kind prediction stays vectorized.
template <typename RouteFn>
Labels predict_by_route(const ConditionalModel& model, const Matrix& features,
                        Eigen::Index n_rows, RouteFn route, const char* what) {
    std::map<std::uint32_t, std::vector<Eigen::Index>> batches;
    for (Eigen::Index i = 0; i < n_rows; ++i) batches[route(i)].push_back(i);

    Labels out(n_rows);
    for (const auto& [id, rows] : batches) {
        const auto it = model.learners.find(id);
        if (it == model.learners.end())
            throw UnseenGroupError(std::string("predict_routed: no learner for ") + what + " id " +
                                   std::to_string(id) + " (empty at training time)");
        const Labels part = predict(it->second, rows_of(features, rows));
        for (std::size_t i = 0; i < rows.size(); ++i)
            out[rows[i]] = part[static_cast<Eigen::Index>(i)];
    }
    return out;
}

}  // namespace

Labels predict_routed(const ConditionalModel& model, const LabeledDataset& test) {
    check_layout(model, test);
    const Matrix features = feature_view(test, model.scheme.include_protected_features);

    switch (model.scheme.kind) {
        case SchemeKind::Overall:
        case SchemeKind::SingleGroup:
        case SchemeKind::SingleCluster:
            return predict(model.learners.at(0u), features);

        case SchemeKind::PerGroup:
            return predict_by_route(
                model, features, test.rows(),
                [&](Eigen::Index i) { return row_group_key(test, model.scheme.spec, i); },
                "group");

        case SchemeKind::PerCluster: {
            const std::vector<int> assignment = model.router->assign(feature_view(test, false));
            return predict_by_route(
                model, features, test.rows(),
                [&](Eigen::Index i) {
                    return static_cast<std::uint32_t>(assignment[static_cast<std::size_t>(i)]);
                },
                "cluster");
        }
    }
    throw std::logic_error("unreachable scheme kind");
}

std::vector<TrainingScheme> enumerate_models(const std::vector<GroupSpec>& specs,
                                             const std::vector<int>& cluster_counts) {
    // Single-attribute specs come before intersectional ones, preserving the
    // given order within each width.
    std::vector<GroupSpec> ordered = specs;
    std::stable_sort(ordered.begin(), ordered.end(), [](const GroupSpec& a, const GroupSpec& b) {
        return a.column_count() < b.column_count();
    });

    std::vector<TrainingScheme> roster;
    roster.push_back(overall_scheme());
    for (const auto& spec : ordered)
        for (GroupKey key = 0; key < spec.group_count(); ++key)
            roster.push_back(single_group_scheme(spec, key));
    for (const auto& spec : ordered) roster.push_back(per_group_scheme(spec));
    const bool qualify = cluster_counts.size() > 1;
    for (const int k : cluster_counts)
        for (int j = 0; j < k; ++j) roster.push_back(single_cluster_scheme(k, j, qualify));
    return roster;
}

}  // namespace ciid
