#pragma once

// Measured-vs-predicted scatter plot as standalone SVG 1.1. Output is a
// pure function of the report: coordinates are fixed-format, nothing is
// timestamped, so identical reports give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "lamde/eval.hpp"

namespace lamde {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace detail

// 640x640 canvas; the plot area is a 500x500 square so the identity
// line runs corner to corner at 45 degrees.
inline std::string export_scatter_svg(const EvalReport& report) {
    if (report.pairs.empty()) throw DataError("nothing to plot: evaluation has no pairs");

    constexpr double kWidth = 640, kHeight = 640;
    constexpr double kLeft = 90, kRight = 50, kTop = 80, kBottom = 60;
    constexpr double kPlotW = kWidth - kLeft - kRight;    // 500
    constexpr double kPlotH = kHeight - kTop - kBottom;   // 500

    double lo = report.pairs.front().measured;
    double hi = lo;
    for (const auto& p : report.pairs) {
        lo = std::min({lo, p.measured, p.predicted});
        hi = std::max({hi, p.measured, p.predicted});
    }
    const double span = hi - lo;
    const double pad = span > 0 ? 0.05 * span : 1.0;
    lo -= pad;
    hi += pad;

    // Shared axis scale: both axes map [lo, hi] onto the square plot area.
    const auto sx = [&](double v) { return kLeft + (v - lo) / (hi - lo) * kPlotW; };
    const auto sy = [&](double v) { return kTop + kPlotH - (v - lo) / (hi - lo) * kPlotH; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n";
    out << "  <style>\n"
           "    text { font-family: sans-serif; fill: #222; }\n"
           "    .frame { fill: none; stroke: #444; stroke-width: 1; }\n"
           "    .tick { stroke: #444; stroke-width: 1; }\n"
           "    .grid { stroke: #ddd; stroke-width: 0.5; }\n"
           "    .line1 { stroke: #777; stroke-width: 1.5; stroke-dasharray: 6 4; fill: none; }\n"
           "    .pt { fill: #1f6fb2; stroke: #134b79; stroke-width: 1; }\n"
           "    .pt-invalid { stroke: #c0392b; stroke-width: 2; fill: none; }\n"
           "  </style>\n";
    out << "  <rect width=\"640\" height=\"640\" fill=\"#ffffff\"/>\n";

    const std::string title = std::string(report.target == Target::La ? "LA" : "MDE") +
                              " measured vs predicted (" +
                              (report.model_kind == ModelKind::Ols ? "linear regression" : "neural network") +
                              ")";
    out << "  <text x=\"320\" y=\"34\" text-anchor=\"middle\" font-size=\"18\">" << title << "</text>\n";

    std::string subtitle;
    {
        char buf[64];
        if (report.metrics.r2_cod)
            std::snprintf(buf, sizeof buf, "r2_cod=%.3f", *report.metrics.r2_cod);
        else
            std::snprintf(buf, sizeof buf, "r2_cod=n/a");
        subtitle = buf;
        if (report.metrics.r2_pearson)
            std::snprintf(buf, sizeof buf, "  r2_pearson=%.3f", *report.metrics.r2_pearson);
        else
            std::snprintf(buf, sizeof buf, "  r2_pearson=n/a");
        subtitle += buf;
    }
    out << "  <text x=\"320\" y=\"58\" text-anchor=\"middle\" font-size=\"13\">" << subtitle
        << "</text>\n";

    // Ticks and grid: 6 evenly spaced values across the shared range.
    constexpr int kTicks = 6;
    for (int i = 0; i < kTicks; ++i) {
        const double v = lo + (hi - lo) * i / (kTicks - 1);
        const std::string x = detail::svg_num(sx(v));
        const std::string y = detail::svg_num(sy(v));
        out << "  <line class=\"grid\" x1=\"" << x << "\" y1=\"" << detail::svg_num(kTop) << "\" x2=\""
            << x << "\" y2=\"" << detail::svg_num(kTop + kPlotH) << "\"/>\n";
        out << "  <line class=\"grid\" x1=\"" << detail::svg_num(kLeft) << "\" y1=\"" << y << "\" x2=\""
            << detail::svg_num(kLeft + kPlotW) << "\" y2=\"" << y << "\"/>\n";
        out << "  <line class=\"tick\" x1=\"" << x << "\" y1=\"" << detail::svg_num(kTop + kPlotH)
            << "\" x2=\"" << x << "\" y2=\"" << detail::svg_num(kTop + kPlotH + 5) << "\"/>\n";
        out << "  <text x=\"" << x << "\" y=\"" << detail::svg_num(kTop + kPlotH + 20)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << detail::tick_label(v) << "</text>\n";
        out << "  <line class=\"tick\" x1=\"" << detail::svg_num(kLeft - 5) << "\" y1=\"" << y
            << "\" x2=\"" << detail::svg_num(kLeft) << "\" y2=\"" << y << "\"/>\n";
        out << "  <text x=\"" << detail::svg_num(kLeft - 9) << "\" y=\"" << detail::svg_num(sy(v) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << detail::tick_label(v) << "</text>\n";
    }

    out << "  <rect class=\"frame\" x=\"" << detail::svg_num(kLeft) << "\" y=\"" << detail::svg_num(kTop)
        << "\" width=\"" << detail::svg_num(kPlotW) << "\" height=\"" << detail::svg_num(kPlotH)
        << "\"/>\n";

    // Identity line: measured == predicted, corner to corner.
    out << "  <line class=\"line1\" x1=\"" << detail::svg_num(sx(lo)) << "\" y1=\""
        << detail::svg_num(sy(lo)) << "\" x2=\"" << detail::svg_num(sx(hi)) << "\" y2=\""
        << detail::svg_num(sy(hi)) << "\"/>\n";

    out << "  <text x=\"" << detail::svg_num(kLeft + kPlotW / 2) << "\" y=\""
        << detail::svg_num(kHeight - 14) << "\" text-anchor=\"middle\" font-size=\"13\">measured, %"
        << "</text>\n";
    out << "  <text x=\"24\" y=\"" << detail::svg_num(kTop + kPlotH / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 24 "
        << detail::svg_num(kTop + kPlotH / 2) << ")\">predicted, %</text>\n";

    for (const auto& p : report.pairs) {
        const double cx = sx(p.measured);
        const double cy = sy(p.predicted);
        if (p.validity == Validity::Valid) {
            out << "  <circle class=\"pt\" cx=\"" << detail::svg_num(cx) << "\" cy=\""
                << detail::svg_num(cy) << "\" r=\"4\"><title>" << p.id << "</title></circle>\n";
        } else {
            // Out-of-range predictions draw as crosses so they stay visible.
            out << "  <path class=\"pt-invalid\" d=\"M " << detail::svg_num(cx - 4) << ' '
                << detail::svg_num(cy - 4) << " L " << detail::svg_num(cx + 4) << ' '
                << detail::svg_num(cy + 4) << " M " << detail::svg_num(cx - 4) << ' '
                << detail::svg_num(cy + 4) << " L " << detail::svg_num(cx + 4) << ' '
                << detail::svg_num(cy - 4) << "\"><title>" << p.id << "</title></path>\n";
        }
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace lamde
