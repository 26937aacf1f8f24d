#pragma once

#include "ciid/conditioning.hpp"
#include "ciid/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ciid {

struct SplitConfig {
    int train = 80;
    int test = 10;
    int validation = 10;
    std::uint64_t seed = 0;

    void validate() const;  // positive ratios summing to 100
};

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
    LabeledDataset validation;
};

// Uniform random permutation by seed, then contiguous slices in the order
// train, test, validation (floor sizes for train and test, remainder to
// validation). Needs at least 10 rows.
SplitResult split(const LabeledDataset& dataset, const SplitConfig& cfg);

struct ExperimentConfig {
    std::vector<GroupSpec> specs;
    std::vector<int> cluster_counts;
    std::vector<LearnerConfig> learner_grid;  // one entry = fixed config
    int runs = 18;
    std::uint64_t base_seed = 1;
    SplitConfig split_ratios{};  // seed field unused; run r splits with base_seed + r

    void validate() const;
};

struct ExperimentResult {
    GroupedMetricsReport report;
    LearnerConfig tuned_learner;
    std::vector<std::string> scheme_names;
    std::vector<std::uint64_t> test_fingerprints;  // one per run
};

// The full protocol: optional validation-based tuning on the first run's
// split, then `runs` repetitions of split/train-every-scheme/evaluate, all
// schemes within a run sharing the identical train and test splits. A run
// where a scheme hits an empty target group (or routes to an unseen one)
// records undefined cells for that scheme and continues. Runs execute in
// parallel into per-run slots, so the resulting report is deterministic.
ExperimentResult run_experiment(const LabeledDataset& full, const ExperimentConfig& cfg);

// Highest validation accuracy wins; ties keep the earliest grid entry. The
// probe fit sees all encoded features, mirroring the overall scheme.
LearnerConfig grid_search(const LabeledDataset& train, const LabeledDataset& validation,
                          const std::vector<LearnerConfig>& grid);

// Self-contained conditional-i.i.d. generator: both groups draw balanced
// labels and place class means at +/- the group's unit boundary normal, so
// the per-group Bayes rule is sign(u_g . x) and its accuracy has the closed
// form Phi(1/sigma_g). boundary_shift rotates the disadvantaged group's
// normal away from the privileged one: u_priv = e1, u_dis ~ e1 + shift*e2.
struct SynthParams {
    std::int64_t n_priv = 1600;
    std::int64_t n_dis = 400;
    int dims = 4;
    double boundary_shift = 3.0;
    double sigma_priv = 1.0;
    double sigma_dis = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthDataset {
    LabeledDataset data;
    double bayes_priv = 0.0;
    double bayes_dis = 0.0;
    Vector boundary_priv;  // unit normals, exposed for generator validation
    Vector boundary_dis;
};

SynthDataset synth_ciid(const SynthParams& params);

// Schema of the generator's CSV form: numeric x1..xd, protected column
// "group" (privileged value "a"), target "label" with positive value "1".
DatasetSchema synth_schema(int dims);
std::string synth_csv(const SynthDataset& synth);

}  // namespace ciid
