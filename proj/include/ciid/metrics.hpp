#pragma once

#include "ciid/groups.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ciid {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
};

// Positive class is label 1.
ConfusionCounts confusion(const Labels& y_true, const Labels& y_pred);

// Each rate is nullopt when its denominator is zero; no NaN ever leaks out.
struct MetricSet {
    std::optional<double> accuracy;
    std::optional<double> tpr;
    std::optional<double> fpr;
    std::optional<double> fnr;
    std::optional<double> tnr;
    std::optional<double> selection_rate;
    std::optional<double> positive_rate;

    std::optional<double> by_name(const std::string& metric) const;
};

inline constexpr std::array<const char*, 7> kMetricNames = {
    "accuracy", "tpr", "fpr", "fnr", "tnr", "selection_rate", "positive_rate"};

MetricSet metric_set(const ConfusionCounts& c);

// Subgroup -> metrics, ordered: "Full" first, then per spec its subgroups
// (intersectional cells before marginals for multi-column specs). Duplicate
// names across specs keep their first occurrence.
struct BreakdownReport {
    std::vector<std::string> order;
    std::map<std::string, MetricSet> by_subgroup;

    const MetricSet& at(const std::string& subgroup) const;
};

BreakdownReport group_breakdown(const LabeledDataset& test, const Labels& preds,
                                const std::vector<GroupSpec>& specs);

struct DisparitySummary {
    double max_abs_difference = 0.0;
    double ratio_min_over_max = 1.0;
};

// Spread of a metric across a group spec's intersectional subgroups,
// ignoring undefined cells; requires at least two defined cells.
DisparitySummary disparity(const BreakdownReport& report, const std::string& metric,
                           const GroupSpec& spec);

struct CompositionTable {
    std::vector<std::pair<std::string, double>> rows;  // ordered, deduplicated

    double at(const std::string& subgroup) const;
};

CompositionTable demographic_composition(const LabeledDataset& dataset,
                                         const std::vector<GroupSpec>& specs);

// One record per (run, model, subgroup, metric); nullopt marks a cell that
// was undefined in that run.
struct MetricRecord {
    int run = 0;
    std::string model;
    std::string subgroup;
    std::string metric;
    std::optional<double> value;
};

struct AggregateCell {
    double mean = 0.0;
    double stddev = 0.0;  // sample std across defined runs; 0 when < 2
    int defined_runs = 0;
    int total_runs = 0;
};

struct AggregateRow {
    std::string model;
    std::string subgroup;
    std::string metric;
    AggregateCell cell;
};

struct GroupedMetricsReport {
    std::vector<std::string> models;
    std::vector<std::string> subgroups;
    std::vector<std::string> metrics;
    int runs = 0;
    std::vector<MetricRecord> records;

    // Means/stds over defined runs, in (model, subgroup, metric) roster order.
    std::vector<AggregateRow> aggregate() const;
    AggregateCell cell(const std::string& model, const std::string& subgroup,
                       const std::string& metric) const;
};

}  // namespace ciid
