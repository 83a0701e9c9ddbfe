#include "jumpctl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jumpctl/errors.hpp"

namespace jumpctl {

namespace {

constexpr double kWidth = 800.0, kHeight = 520.0;
constexpr double kLeft = 78.0, kRight = 30.0, kTop = 48.0, kBottom = 60.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Round-ish tick spacing covering [lo, hi] with about n intervals.
std::vector<double> ticks(double lo, double hi, int n) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return out;
}

}  // namespace

void emit_svg(std::span<const PlotSeries> series, const std::string& x_label,
              const std::string& y_label, const std::string& title, const std::string& file) {
    if (series.empty()) throw std::invalid_argument("emit_svg: no series");
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    std::size_t n_points = 0;
    for (const PlotSeries& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("emit_svg: x/y size mismatch in '" + s.label + "'");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i] - e);
            yhi = std::max(yhi, s.y[i] + e);
            ++n_points;
        }
    }
    if (n_points == 0) throw std::invalid_argument("emit_svg: series have no points");
    if (xhi <= xlo) {
        xlo -= 0.5;
        xhi += 0.5;
    }
    if (yhi <= ylo) {
        ylo -= 0.5;
        yhi += 0.5;
    }
    const double ypad = 0.06 * (yhi - ylo);
    ylo -= ypad;
    yhi += ypad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * plot_w; };
    auto sy = [&](double y) { return kTop + (1.0 - (y - ylo) / (yhi - ylo)) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"17\">" << title << "</text>\n";

    for (double t : ticks(xlo, xhi, 6)) {
        const double px = sx(t);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << kTop + plot_h << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << kTop + plot_h + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t)
            << "</text>\n";
    }
    for (double t : ticks(ylo, yhi, 6)) {
        const double py = sy(t);
        out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py) << "\" x2=\"" << kLeft + plot_w
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t)
            << "</text>\n";
    }
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << x_label
        << "</text>\n";
    out << "<text x=\"20\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        << "transform=\"rotate(-90 20 " << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const char* color = kColors[si % 6];
        if (!s.x.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i])) << " ";
            out << "\"/>\n";
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double px = sx(s.x[i]);
            out << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(sy(s.y[i]))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            if (i < s.yerr.size() && s.yerr[i] > 0.0) {
                const double y1 = sy(s.y[i] - s.yerr[i]);
                const double y2 = sy(s.y[i] + s.yerr[i]);
                out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(px)
                    << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color << "\"/>\n";
                for (double ye : {y1, y2})
                    out << "<line x1=\"" << fmt(px - 4) << "\" y1=\"" << fmt(ye) << "\" x2=\""
                        << fmt(px + 4) << "\" y2=\"" << fmt(ye) << "\" stroke=\"" << color
                        << "\"/>\n";
            }
        }
        const double ly = kTop + 16 + 20 * static_cast<double>(si);
        out << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << kLeft + plot_w - 124 << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kLeft + plot_w - 118 << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"13\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";

    std::ofstream f(file);
    if (!f) throw IoError("cannot open " + file);
    f << out.str();
    if (!f) throw IoError("failed writing " + file);
}

}  // namespace jumpctl
