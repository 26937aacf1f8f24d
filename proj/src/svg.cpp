#include "ciid/svg.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace ciid {

namespace {

const char* kPalette[] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
    "#ff9da7", "#9c755f", "#bab0ac", "#1f77b4", "#8c564b", "#2ca02c", "#d62728",
    "#9467bd", "#17becf",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) { return format_double(v); }

}  // namespace

std::string render_metric_chart(const GroupedMetricsReport& report, const std::string& metric) {
    std::map<std::string, std::map<std::string, AggregateCell>> cells;
    for (const auto& row : report.aggregate())
        if (row.metric == metric) cells[row.subgroup][row.model] = row.cell;

    const auto n_models = report.models.size();
    const auto n_groups = report.subgroups.size();

    const double bar_w = 16.0;
    const double bar_gap = 2.0;
    const double cluster_gap = 26.0;
    const double cluster_w = static_cast<double>(n_models) * (bar_w + bar_gap);
    const double left = 56.0, top = 34.0, bottom = 120.0;
    const double plot_h = 260.0;
    const double plot_w = static_cast<double>(n_groups) * (cluster_w + cluster_gap);
    const double legend_w = 170.0;
    const double width = left + plot_w + legend_w + 20.0;
    const double height = top + plot_h + bottom;
    const double y0 = top + plot_h;  // y pixel of value 0

    auto y_of = [&](double value) { return y0 - value * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
    svg << "<style>text{font-family:sans-serif;}</style>\n";
    svg << "<text x=\"" << num(left) << "\" y=\"20\" font-size=\"14\">" << xml_escape(metric)
        << " by test subgroup (error bars: std over " << report.runs << " runs)</text>\n";

    // Axis, ticks, gridlines; every metric lives in [0, 1].
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(y0) << "\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = t / 5.0;
        svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y_of(v)) << "\" x2=\""
            << num(left + plot_w) << "\" y2=\"" << num(y_of(v))
            << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y_of(v) + 4)
            << "\" font-size=\"10\" text-anchor=\"end\">" << num(v) << "</text>\n";
    }
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(left + plot_w)
        << "\" y2=\"" << num(y0) << "\" stroke=\"#333\"/>\n";

    for (std::size_t g = 0; g < n_groups; ++g) {
        const double cluster_x = left + cluster_gap / 2 + static_cast<double>(g) *
                                                              (cluster_w + cluster_gap);
        const auto group_cells = cells.find(report.subgroups[g]);
        for (std::size_t m = 0; m < n_models; ++m) {
            if (group_cells == cells.end()) break;
            const auto cell_it = group_cells->second.find(report.models[m]);
            if (cell_it == group_cells->second.end()) continue;
            const AggregateCell& cell = cell_it->second;
            if (cell.defined_runs == 0) continue;

            const double x = cluster_x + static_cast<double>(m) * (bar_w + bar_gap);
            const double mean = cell.mean;
            svg << "<rect x=\"" << num(x) << "\" y=\"" << num(y_of(mean)) << "\" width=\""
                << num(bar_w) << "\" height=\"" << num(y0 - y_of(mean)) << "\" fill=\""
                << kPalette[m % kPaletteSize] << "\"/>\n";

            if (cell.stddev > 0.0) {
                const double lo = std::max(0.0, mean - cell.stddev);
                const double hi = std::min(1.0, mean + cell.stddev);
                const double cx = x + bar_w / 2;
                svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(lo)) << "\" x2=\""
                    << num(cx) << "\" y2=\"" << num(y_of(hi))
                    << "\" stroke=\"#222\" stroke-width=\"1\"/>\n";
                for (double v : {lo, hi})
                    svg << "<line x1=\"" << num(cx - 4) << "\" y1=\"" << num(y_of(v)) << "\" x2=\""
                        << num(cx + 4) << "\" y2=\"" << num(y_of(v))
                        << "\" stroke=\"#222\" stroke-width=\"1\"/>\n";
            }
        }
        const double label_x = cluster_x + cluster_w / 2;
        svg << "<text x=\"" << num(label_x) << "\" y=\"" << num(y0 + 12)
            << "\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-40 " << num(label_x)
            << " " << num(y0 + 12) << ")\">" << xml_escape(report.subgroups[g]) << "</text>\n";
    }

    const double legend_x = left + plot_w + 16.0;
    for (std::size_t m = 0; m < n_models; ++m) {
        const double y = top + static_cast<double>(m) * 16.0;
        svg << "<rect x=\"" << num(legend_x) << "\" y=\"" << num(y)
            << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[m % kPaletteSize] << "\"/>\n";
        svg << "<text x=\"" << num(legend_x + 14) << "\" y=\"" << num(y + 9)
            << "\" font-size=\"10\">" << xml_escape(report.models[m]) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ciid
