#include "ciid/harness.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace ciid {

void SplitConfig::validate() const {
    if (train <= 0 || test <= 0 || validation <= 0)
        throw ConfigError("split ratios must be positive");
    if (train + test + validation != 100) throw ConfigError("split ratios must sum to 100");
}

SplitResult split(const LabeledDataset& dataset, const SplitConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = dataset.rows();
    if (n < 10) throw TooFewRowsError("split: need at least 10 rows");

    // Fisher-Yates with an explicit bounded draw keeps the permutation under
    // our control rather than the library's shuffle implementation.
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<Eigen::Index> pick(0, i);
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }

    const auto n_train = static_cast<Eigen::Index>(static_cast<std::int64_t>(n) * cfg.train / 100);
    const auto n_test = static_cast<Eigen::Index>(static_cast<std::int64_t>(n) * cfg.test / 100);

    const std::vector<Eigen::Index> train_rows(perm.begin(), perm.begin() + n_train);
    const std::vector<Eigen::Index> test_rows(perm.begin() + n_train,
                                              perm.begin() + n_train + n_test);
    const std::vector<Eigen::Index> val_rows(perm.begin() + n_train + n_test, perm.end());

    return {take_rows(dataset, train_rows), take_rows(dataset, test_rows),
            take_rows(dataset, val_rows)};
}

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("experiment: runs must be >= 1");
    if (learner_grid.empty()) throw ConfigError("experiment: learner grid is empty");
    for (const auto& learner : learner_grid) learner.validate();
    for (const int k : cluster_counts)
        if (k < 2) throw ConfigError("experiment: cluster counts must be >= 2");
    SplitConfig ratios = split_ratios;
    ratios.validate();
}

LearnerConfig grid_search(const LabeledDataset& train, const LabeledDataset& validation,
                          const std::vector<LearnerConfig>& grid) {
    if (grid.empty()) throw ConfigError("grid_search: empty grid");
    const Matrix train_features = feature_view(train, true);
    const Matrix val_features = feature_view(validation, true);

    std::size_t best_idx = 0;
    double best_accuracy = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const FittedLearner model = fit(grid[g], train_features, train.y, 0);
        const Labels preds = predict(model, val_features);
        Eigen::Index correct = 0;
        for (Eigen::Index i = 0; i < validation.rows(); ++i) correct += preds[i] == validation.y[i];
        const double accuracy =
            validation.rows() > 0 ? static_cast<double>(correct) / validation.rows() : 0.0;
        if (accuracy > best_accuracy) {  // strict: ties keep the earlier entry
            best_accuracy = accuracy;
            best_idx = g;
        }
    }
    return grid[best_idx];
}

namespace {

struct RunOutput {
    std::vector<MetricRecord> records;
    std::uint64_t test_fingerprint = 0;
};

std::vector<std::string> subgroup_roster(const LabeledDataset& sample,
                                         const std::vector<GroupSpec>& specs) {
    // The breakdown's subgroup order is data-independent; probe it once.
    return group_breakdown(sample, Labels::Zero(sample.rows()), specs).order;
}

}  // namespace

ExperimentResult run_experiment(const LabeledDataset& full, const ExperimentConfig& cfg) {
    cfg.validate();
    for (const auto& spec : cfg.specs) spec.validate(full.schema);

    const std::vector<TrainingScheme> roster = enumerate_models(cfg.specs, cfg.cluster_counts);

    ExperimentResult result;
    for (const auto& scheme : roster) result.scheme_names.push_back(scheme.name);

    // Tune once on the first run's split, then freeze for every scheme.
    result.tuned_learner = cfg.learner_grid.front();
    if (cfg.learner_grid.size() > 1) {
        SplitConfig tune_cfg = cfg.split_ratios;
        tune_cfg.seed = cfg.base_seed + 1;
        const SplitResult parts = split(full, tune_cfg);
        SplitResult imputed = parts;
        const Imputer imputer = fit_imputer(imputed.train);
        apply_imputer(imputer, imputed.train);
        apply_imputer(imputer, imputed.validation);
        result.tuned_learner = grid_search(imputed.train, imputed.validation, cfg.learner_grid);
    }
    const LearnerConfig learner = result.tuned_learner;

    const std::vector<std::string> subgroups = subgroup_roster(full, cfg.specs);
    const std::vector<std::string> metrics(kMetricNames.begin(), kMetricNames.end());

    std::vector<RunOutput> outputs(static_cast<std::size_t>(cfg.runs));
    parallel_for(static_cast<std::size_t>(cfg.runs), [&](std::size_t slot) {
        const int run = static_cast<int>(slot) + 1;
        SplitConfig split_cfg = cfg.split_ratios;
        split_cfg.seed = cfg.base_seed + static_cast<std::uint64_t>(run);
        SplitResult parts = split(full, split_cfg);
        const Imputer imputer = fit_imputer(parts.train);
        apply_imputer(imputer, parts.train);
        apply_imputer(imputer, parts.test);

        RunOutput& out = outputs[slot];
        out.test_fingerprint = dataset_fingerprint(parts.test);
        const std::uint64_t train_seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(run));

        // One clustering per distinct k per run, shared across its schemes.
        std::map<int, ClusterRouter> routers;
        for (const auto& scheme : roster) {
            if (scheme.cluster_count < 2 || routers.count(scheme.cluster_count)) continue;
            routers.emplace(scheme.cluster_count,
                            fit_cluster_router(parts.train, scheme.cluster_count,
                                               scheme_cluster_seed(train_seed,
                                                                   scheme.cluster_count)));
        }

        for (const auto& scheme : roster) {
            const ClusterRouter* router =
                scheme.cluster_count >= 2 ? &routers.at(scheme.cluster_count) : nullptr;
            BreakdownReport breakdown;
            bool defined = true;
            try {
                const ConditionalModel model =
                    train_scheme(parts.train, scheme, learner, train_seed, router);
                const Labels preds = predict_routed(model, parts.test);
                breakdown = group_breakdown(parts.test, preds, cfg.specs);
            } catch (const EmptyTargetGroupError&) {
                defined = false;
            } catch (const UnseenGroupError&) {
                defined = false;
            } catch (const TooFewSamplesError&) {
                defined = false;
            }
            for (const auto& subgroup : subgroups)
                for (const auto& metric : metrics) {
                    MetricRecord record;
                    record.run = run;
                    record.model = scheme.name;
                    record.subgroup = subgroup;
                    record.metric = metric;
                    if (defined) record.value = breakdown.at(subgroup).by_name(metric);
                    out.records.push_back(std::move(record));
                }
        }
    });

    result.report.models = result.scheme_names;
    result.report.subgroups = subgroups;
    result.report.metrics = metrics;
    result.report.runs = cfg.runs;
    for (const auto& out : outputs) {
        result.test_fingerprints.push_back(out.test_fingerprint);
        result.report.records.insert(result.report.records.end(), out.records.begin(),
                                     out.records.end());
    }
    return result;
}

void SynthParams::validate() const {
    if (n_priv < 1 || n_dis < 1) throw ConfigError("synth: group sizes must be >= 1");
    if (dims < 1) throw ConfigError("synth: dims must be >= 1");
    if (boundary_shift != 0.0 && dims < 2)
        throw ConfigError("synth: a nonzero boundary shift needs dims >= 2");
    if (!(sigma_priv > 0.0) || !(sigma_dis > 0.0))
        throw ConfigError("synth: noise sigmas must be > 0");
    if (!std::isfinite(boundary_shift)) throw ConfigError("synth: boundary shift must be finite");
}

DatasetSchema synth_schema(int dims) {
    DatasetSchema schema;
    for (int d = 0; d < dims; ++d)
        schema.columns.push_back({"x" + std::to_string(d + 1), ColumnKind::Numeric});
    schema.target = {"label", "1"};
    schema.protected_columns = {{"group", "a"}};
    return schema;
}

SynthDataset synth_ciid(const SynthParams& params) {
    params.validate();
    const Eigen::Index n = params.n_priv + params.n_dis;
    const int d = params.dims;

    SynthDataset out;
    out.boundary_priv = Vector::Zero(d);
    out.boundary_priv[0] = 1.0;
    out.boundary_dis = Vector::Zero(d);
    out.boundary_dis[0] = 1.0;
    if (d >= 2) out.boundary_dis[1] = params.boundary_shift;
    out.boundary_dis.normalize();
    out.bayes_priv = normal_cdf(1.0 / params.sigma_priv);
    out.bayes_dis = normal_cdf(1.0 / params.sigma_dis);

    LabeledDataset& data = out.data;
    data.schema = synth_schema(d);
    for (int j = 0; j < d; ++j) data.columns.push_back({"x" + std::to_string(j + 1), false});
    data.columns.push_back({"group=a", true});
    data.X = Matrix(n, d + 1);
    data.y = Labels(n);
    data.protected_raw.assign(1, std::vector<std::string>(static_cast<std::size_t>(n)));

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> z01(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool priv = i < params.n_priv;
        const Vector& u = priv ? out.boundary_priv : out.boundary_dis;
        const double sigma = priv ? params.sigma_priv : params.sigma_dis;
        const int label = coin(rng) ? 1 : 0;
        for (int j = 0; j < d; ++j)
            data.X(i, j) = (label == 1 ? 1.0 : -1.0) * u[j] + sigma * z01(rng);
        data.X(i, d) = priv ? 1.0 : 0.0;
        data.protected_raw[0][static_cast<std::size_t>(i)] = priv ? "a" : "b";
        data.y[i] = label;
    }
    return out;
}

std::string synth_csv(const SynthDataset& synth) {
    const LabeledDataset& data = synth.data;
    const int d = static_cast<int>(data.X.cols()) - 1;
    std::ostringstream os;
    for (int j = 0; j < d; ++j) os << "x" << j + 1 << ",";
    os << "group,label\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (int j = 0; j < d; ++j) os << format_double(data.X(i, j)) << ",";
        os << data.protected_raw[0][static_cast<std::size_t>(i)] << "," << data.y[i] << "\n";
    }
    return os.str();
}

}  // namespace ciid
