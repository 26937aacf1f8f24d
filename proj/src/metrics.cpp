#include "ciid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ciid {

ConfusionCounts confusion(const Labels& y_true, const Labels& y_pred) {
    if (y_true.size() != y_pred.size())
        throw LengthMismatchError("confusion: label vectors differ in length");
    ConfusionCounts c;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        const bool truth = y_true[i] == 1;
        const bool pred = y_pred[i] == 1;
        if (truth && pred) ++c.tp;
        else if (truth) ++c.fn;
        else if (pred) ++c.fp;
        else ++c.tn;
    }
    return c;
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricSet metric_set(const ConfusionCounts& c) {
    MetricSet m;
    const std::int64_t n = c.total();
    m.accuracy = ratio(c.tp + c.tn, n);
    m.tpr = ratio(c.tp, c.tp + c.fn);
    m.fpr = ratio(c.fp, c.fp + c.tn);
    // Complement forms keep tpr+fnr and fpr+tnr exactly 1 in floating point.
    if (m.tpr) m.fnr = 1.0 - *m.tpr;
    if (m.fpr) m.tnr = 1.0 - *m.fpr;
    m.selection_rate = ratio(c.tp + c.fp, n);
    m.positive_rate = ratio(c.tp + c.fn, n);
    return m;
}

std::optional<double> MetricSet::by_name(const std::string& metric) const {
    if (metric == "accuracy") return accuracy;
    if (metric == "tpr") return tpr;
    if (metric == "fpr") return fpr;
    if (metric == "fnr") return fnr;
    if (metric == "tnr") return tnr;
    if (metric == "selection_rate") return selection_rate;
    if (metric == "positive_rate") return positive_rate;
    throw UnknownColumnError("unknown metric: " + metric);
}

const MetricSet& BreakdownReport::at(const std::string& subgroup) const {
    auto it = by_subgroup.find(subgroup);
    if (it == by_subgroup.end()) throw UnknownColumnError("unknown subgroup: " + subgroup);
    return it->second;
}

namespace {

// Subgroup rosters share one shape: (name, row membership test). Marginals
// and intersectional cells differ only in the membership predicate.
struct SubgroupDef {
    std::string name;
    std::vector<Eigen::Index> rows;
};

std::vector<SubgroupDef> subgroups_for_spec(const LabeledDataset& dataset, const GroupSpec& spec) {
    spec.validate(dataset.schema);
    std::vector<SubgroupDef> defs;
    const auto rows_by_key = group_rows(dataset, spec);

    if (spec.column_count() > 1) {
        for (const auto& [key, rows] : rows_by_key)
            defs.push_back({subgroup_name(spec, key), rows});
    }
    for (std::size_t c = 0; c < spec.protected_columns.size(); ++c) {
        for (const bool privileged : {true, false}) {
            SubgroupDef def;
            def.name = marginal_name(spec.protected_columns[c], privileged);
            for (const auto& [key, rows] : rows_by_key) {
                const bool key_priv =
                    ((key >> (spec.column_count() - 1 - c)) & 1u) == 0;
                if (key_priv == privileged)
                    def.rows.insert(def.rows.end(), rows.begin(), rows.end());
            }
            std::sort(def.rows.begin(), def.rows.end());
            defs.push_back(std::move(def));
        }
    }
    if (spec.column_count() == 1) {
        // The marginals already are the cells; drop the duplicate cell names.
        defs.erase(defs.begin() + 2, defs.end());
    }
    return defs;
}

}  // namespace

BreakdownReport group_breakdown(const LabeledDataset& test, const Labels& preds,
                                const std::vector<GroupSpec>& specs) {
    if (test.rows() != preds.size())
        throw LengthMismatchError("group_breakdown: predictions and rows differ in length");

    BreakdownReport report;
    auto add = [&](const std::string& name, const std::vector<Eigen::Index>& rows) {
        if (report.by_subgroup.count(name)) return;  // first occurrence wins
        Labels yt(static_cast<Eigen::Index>(rows.size()));
        Labels yp(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            yt[static_cast<Eigen::Index>(i)] = test.y[rows[i]];
            yp[static_cast<Eigen::Index>(i)] = preds[rows[i]];
        }
        report.order.push_back(name);
        report.by_subgroup.emplace(name, metric_set(confusion(yt, yp)));
    };

    std::vector<Eigen::Index> all(static_cast<std::size_t>(test.rows()));
    for (Eigen::Index i = 0; i < test.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
    add("Full", all);
    for (const auto& spec : specs)
        for (const auto& def : subgroups_for_spec(test, spec)) add(def.name, def.rows);
    return report;
}

DisparitySummary disparity(const BreakdownReport& report, const std::string& metric,
                           const GroupSpec& spec) {
    std::vector<double> values;
    for (GroupKey key = 0; key < spec.group_count(); ++key) {
        const std::string name = spec.column_count() == 1
                                     ? marginal_name(spec.protected_columns[0], key == 0)
                                     : subgroup_name(spec, key);
        const auto it = report.by_subgroup.find(name);
        if (it == report.by_subgroup.end()) continue;
        const auto value = it->second.by_name(metric);
        if (value) values.push_back(*value);
    }
    if (values.size() < 2)
        throw InsufficientDefinedCellsError("disparity: fewer than two defined cells for metric " +
                                            metric);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    DisparitySummary out;
    out.max_abs_difference = *hi - *lo;
    out.ratio_min_over_max = *hi > 0.0 ? *lo / *hi : 1.0;
    return out;
}

double CompositionTable::at(const std::string& subgroup) const {
    for (const auto& [name, value] : rows)
        if (name == subgroup) return value;
    throw UnknownColumnError("unknown subgroup: " + subgroup);
}

CompositionTable demographic_composition(const LabeledDataset& dataset,
                                         const std::vector<GroupSpec>& specs) {
    CompositionTable table;
    std::set<std::string> seen;
    const double n = static_cast<double>(dataset.rows());
    for (const auto& spec : specs) {
        for (const auto& def : subgroups_for_spec(dataset, spec)) {
            if (!seen.insert(def.name).second) continue;
            table.rows.emplace_back(def.name,
                                    n > 0.0 ? static_cast<double>(def.rows.size()) / n : 0.0);
        }
    }
    return table;
}

std::vector<AggregateRow> GroupedMetricsReport::aggregate() const {
    // Accumulate per cell in one pass, then emit in roster order.
    struct Acc {
        double sum = 0.0, sum_sq = 0.0;
        int defined = 0, total = 0;
    };
    std::map<std::string, Acc> acc;
    auto cell_id = [](const MetricRecord& r) {
        return r.model + "\x1f" + r.subgroup + "\x1f" + r.metric;
    };
    for (const auto& r : records) {
        Acc& a = acc[cell_id(r)];
        ++a.total;
        if (r.value) {
            ++a.defined;
            a.sum += *r.value;
            a.sum_sq += *r.value * *r.value;
        }
    }
    std::vector<AggregateRow> out;
    for (const auto& model : models)
        for (const auto& subgroup : subgroups)
            for (const auto& metric : metrics) {
                const auto it = acc.find(model + "\x1f" + subgroup + "\x1f" + metric);
                if (it == acc.end()) continue;
                const Acc& a = it->second;
                AggregateRow row{model, subgroup, metric, {}};
                row.cell.defined_runs = a.defined;
                row.cell.total_runs = a.total;
                if (a.defined > 0) row.cell.mean = a.sum / a.defined;
                if (a.defined > 1) {
                    const double var =
                        std::max(0.0, (a.sum_sq - a.sum * a.sum / a.defined) / (a.defined - 1));
                    row.cell.stddev = std::sqrt(var);
                }
                out.push_back(std::move(row));
            }
    return out;
}

AggregateCell GroupedMetricsReport::cell(const std::string& model, const std::string& subgroup,
                                         const std::string& metric) const {
    for (const auto& row : aggregate())
        if (row.model == model && row.subgroup == subgroup && row.metric == metric)
            return row.cell;
    throw UnknownColumnError("no such report cell: " + model + "/" + subgroup + "/" + metric);
}

}  // namespace ciid
