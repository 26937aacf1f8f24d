#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ciid/harness.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace ciid;

namespace {

// Single numeric column "x" holding the original row index, so split
// partitions are easy to audit.
LabeledDataset indexed_dataset(int n) {
    LabeledDataset data;
    data.schema.columns = {{"x", ColumnKind::Numeric}};
    data.schema.target = {"label", "1"};
    data.schema.protected_columns = {{"g", "a"}};
    data.columns = {{"x", false}, {"g=a", true}};
    data.X = Matrix(n, 2);
    data.y = Labels(n);
    data.protected_raw.assign(1, std::vector<std::string>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        data.X(i, 0) = i;
        data.X(i, 1) = i % 2 == 0 ? 1.0 : 0.0;
        data.protected_raw[0][static_cast<std::size_t>(i)] = i % 2 == 0 ? "a" : "b";
        data.y[i] = i % 5 == 0 ? 0 : 1;
    }
    return data;
}

std::multiset<double> x_values(const LabeledDataset& data) {
    std::multiset<double> out;
    for (Eigen::Index i = 0; i < data.rows(); ++i) out.insert(data.X(i, 0));
    return out;
}

LearnerConfig tree_cfg(int depth, int min_leaf) {
    LearnerConfig cfg;
    cfg.kind = LearnerKind::DecisionTree;
    cfg.tree = {depth, min_leaf};
    return cfg;
}

LearnerConfig logreg_cfg() {
    LearnerConfig cfg;
    cfg.kind = LearnerKind::LogisticRegression;
    cfg.logreg = {0.5, 400, 1e-4};
    return cfg;
}

const MetricRecord& find_record(const GroupedMetricsReport& report, int run,
                                const std::string& model, const std::string& subgroup,
                                const std::string& metric) {
    for (const auto& r : report.records)
        if (r.run == run && r.model == model && r.subgroup == subgroup && r.metric == metric)
            return r;
    throw std::runtime_error("record not found");
}

}  // namespace

TEST_CASE("split: ratio arithmetic") {
    const auto s100 = split(indexed_dataset(100), {80, 10, 10, 1});
    CHECK(s100.train.rows() == 80);
    CHECK(s100.test.rows() == 10);
    CHECK(s100.validation.rows() == 10);

    // 5278 rows: floor(0.8n)=4222, floor(0.1n)=527, remainder 529.
    const auto s5278 = split(indexed_dataset(5278), {80, 10, 10, 9});
    CHECK(s5278.train.rows() == 4222);
    CHECK(s5278.test.rows() == 527);
    CHECK(s5278.validation.rows() == 529);
}

TEST_CASE("split: deterministic partition of the input") {
    const auto data = indexed_dataset(53);
    const auto a = split(data, {80, 10, 10, 7});
    const auto b = split(data, {80, 10, 10, 7});
    CHECK(dataset_fingerprint(a.train) == dataset_fingerprint(b.train));
    CHECK(dataset_fingerprint(a.test) == dataset_fingerprint(b.test));
    CHECK(dataset_fingerprint(a.validation) == dataset_fingerprint(b.validation));

    const auto c = split(data, {80, 10, 10, 8});
    CHECK(dataset_fingerprint(a.train) != dataset_fingerprint(c.train));

    // Union of the three parts is exactly the input, no duplicates.
    std::multiset<double> all = x_values(a.train);
    for (double v : x_values(a.test)) all.insert(v);
    for (double v : x_values(a.validation)) all.insert(v);
    CHECK(all == x_values(data));
}

TEST_CASE("split: validation") {
    CHECK_THROWS_AS(split(indexed_dataset(9), {80, 10, 10, 1}), TooFewRowsError);
    CHECK_THROWS_AS(split(indexed_dataset(20), {80, 15, 10, 1}), ConfigError);
    CHECK_THROWS_AS(split(indexed_dataset(20), {100, -10, 10, 1}), ConfigError);
}

TEST_CASE("grid_search: singleton grid and tie order") {
    auto data = indexed_dataset(40);
    data.y.setOnes();  // every config scores 1.0 on validation
    const auto parts = split(data, {80, 10, 10, 3});
    const std::vector<LearnerConfig> grid = {tree_cfg(2, 1), tree_cfg(6, 1)};
    const auto picked = grid_search(parts.train, parts.validation, grid);
    CHECK(picked.tree.max_depth == 2);  // first entry wins the tie

    const auto single = grid_search(parts.train, parts.validation, {tree_cfg(4, 2)});
    CHECK(single.tree.max_depth == 4);
    CHECK_THROWS_AS(grid_search(parts.train, parts.validation, {}), ConfigError);
}

TEST_CASE("grid_search: xor-style data needs the deeper tree") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    LabeledDataset data;
    data.schema.columns = {{"x1", ColumnKind::Numeric}, {"x2", ColumnKind::Numeric}};
    data.schema.target = {"label", "1"};
    data.schema.protected_columns = {{"g", "a"}};
    data.columns = {{"x1", false}, {"x2", false}, {"g=a", true}};
    const int n = 400;
    data.X = Matrix(n, 3);
    data.y = Labels(n);
    data.protected_raw.assign(1, std::vector<std::string>(n, "a"));
    for (int i = 0; i < n; ++i) {
        const double x1 = unif(rng), x2 = unif(rng);
        data.X(i, 0) = x1;
        data.X(i, 1) = x2;
        data.X(i, 2) = 1.0;
        data.y[i] = (x1 > 0.5) != (x2 > 0.5) ? 1 : 0;
    }
    const auto parts = split(data, {80, 10, 10, 5});
    const auto picked = grid_search(parts.train, parts.validation, {tree_cfg(1, 1), tree_cfg(8, 1)});
    CHECK(picked.tree.max_depth == 8);
}

TEST_CASE("synth_ciid: shapes, determinism, and validation") {
    SynthParams params;
    params.n_priv = 30;
    params.n_dis = 20;
    params.dims = 3;
    params.seed = 11;
    const auto synth = synth_ciid(params);
    CHECK(synth.data.rows() == 50);
    CHECK(synth.data.X.cols() == 4);  // 3 features + group indicator
    CHECK(synth.data.protected_raw[0][0] == "a");
    CHECK(synth.data.protected_raw[0][49] == "b");
    CHECK(synth.bayes_priv == doctest::Approx(normal_cdf(1.0)).epsilon(1e-12));

    const auto again = synth_ciid(params);
    CHECK(dataset_fingerprint(synth.data) == dataset_fingerprint(again.data));

    SynthParams bad = params;
    bad.n_dis = 0;
    CHECK_THROWS_AS(synth_ciid(bad), ConfigError);
    SynthParams flat = params;
    flat.dims = 1;
    flat.boundary_shift = 2.0;
    CHECK_THROWS_AS(synth_ciid(flat), ConfigError);
}

TEST_CASE("synth_ciid: empirical accuracy of the true rule matches the bayes form") {
    SynthParams params;
    params.n_priv = 40000;
    params.n_dis = 40000;
    params.dims = 3;
    params.boundary_shift = 2.0;
    params.sigma_priv = 1.0;
    params.sigma_dis = 1.5;
    params.seed = 23;
    const auto synth = synth_ciid(params);

    double correct_priv = 0.0, correct_dis = 0.0;
    for (Eigen::Index i = 0; i < synth.data.rows(); ++i) {
        const bool priv = synth.data.protected_raw[0][static_cast<std::size_t>(i)] == "a";
        const Vector& u = priv ? synth.boundary_priv : synth.boundary_dis;
        const double score = synth.data.X.row(i).head(3).dot(u.transpose());
        const int pred = score > 0 ? 1 : 0;
        (priv ? correct_priv : correct_dis) += pred == synth.data.y[i];
    }
    const double se = 4.0 * std::sqrt(0.25 / 40000.0);
    CHECK(std::abs(correct_priv / 40000.0 - synth.bayes_priv) <= se);
    CHECK(std::abs(correct_dis / 40000.0 - synth.bayes_dis) <= se);
}

TEST_CASE("synth_ciid: zero shift lets one learner reach near-bayes on both groups") {
    SynthParams params;
    params.n_priv = 3000;
    params.n_dis = 3000;
    params.dims = 3;
    params.boundary_shift = 0.0;
    params.seed = 31;
    const auto synth = synth_ciid(params);
    const auto parts = split(synth.data, {80, 10, 10, 2});
    const auto model = train_scheme(parts.train, overall_scheme(), logreg_cfg(), 1);
    const auto breakdown = group_breakdown(
        parts.test, predict_routed(model, parts.test),
        {make_group_spec(synth.data.schema, {"group"})});
    CHECK(*breakdown.at("group_priv").accuracy >= synth.bayes_priv - 0.06);
    CHECK(*breakdown.at("group_dis").accuracy >= synth.bayes_dis - 0.06);
}

TEST_CASE("synth_ciid: large shift hurts the overall model on the dis group") {
    SynthParams params;
    params.n_priv = 4000;
    params.n_dis = 1000;
    params.dims = 3;
    params.boundary_shift = 3.0;
    params.seed = 37;
    const auto synth = synth_ciid(params);
    const auto parts = split(synth.data, {80, 10, 10, 4});
    const auto model = train_scheme(parts.train, overall_scheme(), logreg_cfg(), 1);
    const auto breakdown = group_breakdown(
        parts.test, predict_routed(model, parts.test),
        {make_group_spec(synth.data.schema, {"group"})});
    CHECK(*breakdown.at("group_dis").accuracy + 0.05 < *breakdown.at("group_priv").accuracy);
}

TEST_CASE("synth_csv emits the documented columns") {
    SynthParams params;
    params.n_priv = 2;
    params.n_dis = 1;
    params.dims = 2;
    params.boundary_shift = 0.0;
    const auto synth = synth_ciid(params);
    const auto csv = synth_csv(synth);
    CHECK(csv.rfind("x1,x2,group,label\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    // Round trip through the parser and the generator's schema.
    const auto records = parse_csv(csv);
    const std::vector<std::vector<std::string>> rows(records.begin() + 1, records.end());
    const auto decoded = encode_dataset(records.front(), rows, synth_schema(2));
    REQUIRE(decoded.rows() == 3);
    CHECK(decoded.y == synth.data.y);
    CHECK(decoded.X.isApprox(synth.data.X, 1e-12));
}

TEST_CASE("run_experiment: constant features give the majority-share accuracy") {
    LabeledDataset data = indexed_dataset(100);
    data.X.col(0).setZero();  // uninformative feature
    ExperimentConfig cfg;
    cfg.specs = {};
    cfg.cluster_counts = {};
    cfg.learner_grid = {tree_cfg(3, 1)};
    cfg.runs = 1;
    cfg.base_seed = 5;
    const auto result = run_experiment(data, cfg);
    REQUIRE(result.scheme_names == std::vector<std::string>{"overall"});

    // Expected: the tree collapses to the train-majority label; accuracy on
    // the test split is that label's share there.
    SplitConfig split_cfg = cfg.split_ratios;
    split_cfg.seed = cfg.base_seed + 1;
    const auto parts = split(data, split_cfg);
    std::int64_t train_ones = parts.train.y.sum();
    const int majority = 2 * train_ones > parts.train.rows() ? 1 : 0;
    double share = 0.0;
    for (Eigen::Index i = 0; i < parts.test.rows(); ++i) share += parts.test.y[i] == majority;
    share /= static_cast<double>(parts.test.rows());

    CHECK(find_record(result.report, 1, "overall", "Full", "accuracy").value ==
          doctest::Approx(share).epsilon(1e-12));
}

TEST_CASE("run_experiment: per-group metrics equal single-group metrics per subgroup") {
    SynthParams params;
    params.n_priv = 600;
    params.n_dis = 300;
    params.dims = 3;
    params.boundary_shift = 2.0;
    params.seed = 41;
    const auto synth = synth_ciid(params);

    ExperimentConfig cfg;
    cfg.specs = {make_group_spec(synth.data.schema, {"group"})};
    cfg.learner_grid = {tree_cfg(5, 2)};
    cfg.runs = 3;
    cfg.base_seed = 77;
    const auto result = run_experiment(synth.data, cfg);

    for (int run = 1; run <= cfg.runs; ++run)
        for (const char* metric : kMetricNames) {
            const auto& routed_priv =
                find_record(result.report, run, "ciid_group", "group_priv", metric);
            const auto& solo_priv =
                find_record(result.report, run, "group_priv", "group_priv", metric);
            CHECK(routed_priv.value == solo_priv.value);
            const auto& routed_dis =
                find_record(result.report, run, "ciid_group", "group_dis", metric);
            const auto& solo_dis = find_record(result.report, run, "group_dis", "group_dis", metric);
            CHECK(routed_dis.value == solo_dis.value);
        }
}

TEST_CASE("run_experiment: deterministic and shares one test split per run") {
    SynthParams params;
    params.n_priv = 200;
    params.n_dis = 100;
    params.dims = 2;
    params.boundary_shift = 1.0;
    params.seed = 51;
    const auto synth = synth_ciid(params);

    ExperimentConfig cfg;
    cfg.specs = {make_group_spec(synth.data.schema, {"group"})};
    cfg.cluster_counts = {2};
    cfg.learner_grid = {tree_cfg(4, 2), tree_cfg(2, 5)};
    cfg.runs = 4;
    cfg.base_seed = 3;

    const auto a = run_experiment(synth.data, cfg);
    const auto b = run_experiment(synth.data, cfg);
    CHECK(a.test_fingerprints == b.test_fingerprints);
    REQUIRE(a.report.records.size() == b.report.records.size());
    for (std::size_t i = 0; i < a.report.records.size(); ++i) {
        CHECK(a.report.records[i].value == b.report.records[i].value);
        CHECK(a.report.records[i].model == b.report.records[i].model);
    }
    CHECK(a.report.records.size() ==
          static_cast<std::size_t>(4 * static_cast<int>(a.report.models.size()) *
                                   static_cast<int>(a.report.subgroups.size()) * 7));
    CHECK(a.tuned_learner.describe() == b.tuned_learner.describe());
}

TEST_CASE("run_experiment: empty target group records undefined cells and continues") {
    auto data = indexed_dataset(60);
    for (auto& v : data.protected_raw[0]) v = "a";  // nobody disadvantaged
    for (Eigen::Index i = 0; i < data.rows(); ++i) data.X(i, 1) = 1.0;

    ExperimentConfig cfg;
    cfg.specs = {make_group_spec(data.schema, {"g"})};
    cfg.learner_grid = {tree_cfg(3, 1)};
    cfg.runs = 2;
    cfg.base_seed = 13;
    const auto result = run_experiment(data, cfg);

    CHECK_FALSE(find_record(result.report, 1, "g_dis", "Full", "accuracy").value.has_value());
    CHECK(find_record(result.report, 1, "overall", "Full", "accuracy").value.has_value());
    CHECK(find_record(result.report, 2, "ciid_g", "g_priv", "accuracy").value.has_value());
    const auto cell = result.report.cell("g_dis", "Full", "accuracy");
    CHECK(cell.defined_runs == 0);
    CHECK(cell.total_runs == 2);
}
