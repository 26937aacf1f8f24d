#pragma once

#include "ciid/metrics.hpp"

#include <string>

namespace ciid {

// Grouped bar chart for one metric: subgroups on the x axis, one colored bar
// per model inside each cluster, error bars spanning mean +/- std across
// runs. Cells with no defined run are left blank. The chart is rendered
// purely from the aggregated report.
std::string render_metric_chart(const GroupedMetricsReport& report, const std::string& metric);

}  // namespace ciid
