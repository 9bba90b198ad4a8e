#pragma once

// Static SVG line plots from metrics records. Plots are views over the
// archived metrics: the numeric series are computed here and can be
// recomputed independently from the raw file, so a figure is always
// regenerable.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lineage/errors.hpp"
#include "lineage/harness/metrics.hpp"

namespace lineage {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> stderr_;  // standard error over seeds x members; 0 for n = 1
};

// Groups records of one metric by generation (one series per generation)
// and by step (x axis), averaging over seeds and members.
inline std::vector<PlotSeries> aggregate_metric(const std::vector<MetricsRecord>& records,
                                                const std::string& name) {
    std::map<int, std::map<std::int64_t, std::vector<double>>> grouped;
    for (const auto& r : records)
        if (r.name == name) grouped[r.generation][r.step].push_back(r.value);
    if (grouped.empty()) throw ConfigError("no records named '" + name + "' to plot");
    std::vector<PlotSeries> series;
    for (const auto& [generation, by_step] : grouped) {
        PlotSeries s;
        s.label = "generation " + std::to_string(generation);
        for (const auto& [step, values] : by_step) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            const double se = values.size() > 1
                                  ? std::sqrt(var / static_cast<double>(values.size() - 1)) /
                                        std::sqrt(static_cast<double>(values.size()))
                                  : 0.0;
            s.x.push_back(static_cast<double>(step));
            s.mean.push_back(mean);
            s.stderr_.push_back(se);
        }
        series.push_back(std::move(s));
    }
    return series;
}

namespace detail {

inline std::string svg_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % 8];
}

}  // namespace detail

// Mean lines with shaded standard-error bands.
inline void write_svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::string& path) {
    if (series.empty()) throw ConfigError("empty plot selection");
    const double width = 720, height = 480;
    const double ml = 64, mr = 160, mt = 42, mb = 48;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.mean[i] - s.stderr_[i]);
            y_max = std::max(y_max, s.mean[i] + s.stderr_[i]);
        }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;
    const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    const auto py = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    // axes
    svg << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 4.0;
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        svg << "<text x='" << px(xv) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << xv << "</text>\n";
        svg << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11'>" << yv << "</text>\n";
    }
    svg << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 10
        << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    svg << "<text x='18' y='" << (mt + height - mb) / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 18 "
        << (mt + height - mb) / 2 << ")'>" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const std::string color = detail::svg_color(si);
        if (s.x.size() > 1) {
            svg << "<polygon fill='" << color << "' fill-opacity='0.15' stroke='none' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                svg << px(s.x[i]) << "," << py(s.mean[i] + s.stderr_[i]) << " ";
            for (std::size_t i = s.x.size(); i-- > 0;)
                svg << px(s.x[i]) << "," << py(s.mean[i] - s.stderr_[i]) << " ";
            svg << "'/>\n";
        }
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) svg << px(s.x[i]) << "," << py(s.mean[i]) << " ";
        svg << "'/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.mean[i]) << "' r='2.5' fill='"
                << color << "'/>\n";
        const double ly = mt + 18.0 * static_cast<double>(si);
        svg << "<line x1='" << width - mr + 10 << "' y1='" << ly << "' x2='" << width - mr + 34
            << "' y2='" << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
        svg << "<text x='" << width - mr + 40 << "' y='" << ly + 4 << "' font-size='12'>" << s.label
            << "</text>\n";
    }
    svg << "</svg>\n";

    const std::string tmp = path + ".part";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot open plot file for writing: " + tmp);
        out << svg.str();
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot move plot into place: " + path);
}

inline std::vector<PlotSeries> emit_plot(const std::vector<MetricsRecord>& records,
                                         const std::string& name, const std::string& title,
                                         const std::string& path) {
    const auto series = aggregate_metric(records, name);
    write_svg_plot(series, title, "trial / step", name, path);
    return series;
}

}  // namespace lineage
