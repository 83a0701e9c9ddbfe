#pragma once

#include <span>
#include <string>
#include <vector>

namespace jumpctl {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;  // 95% half-widths; may be empty
};

// Standalone SVG line chart with error bars and a legend; no external assets.
// Throws on empty input without touching the file.
void emit_svg(std::span<const PlotSeries> series, const std::string& x_label,
              const std::string& y_label, const std::string& title, const std::string& file);

}  // namespace jumpctl
