#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "gridrrt/errors.hpp"
#include "gridrrt/numfmt.hpp"

namespace gridrrt {

// Minimal self-contained SVG line chart: one polyline per series over a
// shared time axis. Deterministic output (fixed-precision coordinates, no
// timestamps) so artifact files reproduce bitwise.
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<double>& t,
                            const std::vector<std::vector<double>>& series,
                            const std::vector<std::string>& names) {
    const double width = 960, height = 520;
    const double ml = 70, mr = 20, mt = 40, mb = 45;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();
    for (const auto& s : series)
        for (double v : s) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (!std::isfinite(ymin) || !std::isfinite(ymax)) {
        ymin = 0;
        ymax = 1;
    }
    if (ymax - ymin < 1e-12) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double tmin = t.empty() ? 0.0 : t.front();
    const double tmax = t.empty() || t.back() == tmin ? tmin + 1.0 : t.back();

    auto px = [&](double tv) { return ml + (tv - tmin) / (tmax - tmin) * pw; };
    auto py = [&](double yv) { return mt + (ymax - yv) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";

    // axes + ticks
    out << "<g stroke=\"#444\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\"/>\n";
    out << "</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double tv = tmin + (tmax - tmin) * k / 5.0;
        const double yv = ymin + (ymax - ymin) * k / 5.0;
        out << "<text x=\"" << fmt_fixed(px(tv), 1) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\">" << fmt_fixed(tv, 2) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt_fixed(py(yv) + 4, 1)
            << "\" text-anchor=\"end\">" << fmt_fixed(yv, 4) << "</text>\n";
    }
    out << "</g>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[s % 10] << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t k = 0; k < t.size() && k < series[s].size(); ++k) {
            if (k) out << " ";
            out << fmt_fixed(px(t[k]), 2) << "," << fmt_fixed(py(series[s][k]), 2);
        }
        out << "\"/>\n";
    }

    // legend (first 10 names)
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t s = 0; s < names.size() && s < 10; ++s) {
        const double lx = ml + 10 + 90.0 * static_cast<double>(s % 5);
        const double ly = mt + 14 + 16.0 * static_cast<double>(s / 5);
        out << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"3\" fill=\""
            << palette[s % 10] << "\"/>\n";
        out << "<text x=\"" << lx + 14 << "\" y=\"" << ly << "\">" << names[s] << "</text>\n";
    }
    out << "</g>\n</svg>\n";
}

}  // namespace gridrrt
