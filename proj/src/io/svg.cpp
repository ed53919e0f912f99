#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nordheim/io.hpp"

namespace nordheim {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 78.0;
constexpr double kRight = 150.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0.0;
    double hi = 1.0;

    double map(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const std::vector<PlotSeries>& series, bool log, bool use_x) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!usable(s.x[i], use_x ? log : false) && use_x) continue;
            const double v = use_x ? s.x[i] : s.y[i];
            const double other = use_x ? s.y[i] : s.x[i];
            if (!usable(v, log) || !std::isfinite(other)) continue;
            lo = std::min(lo, a.map(v));
            hi = std::max(hi, a.map(v));
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        const double pad = std::max(0.5, 0.05 * std::abs(hi));
        lo -= pad;
        hi += pad;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const Axis ax = make_axis(series, spec.log_x, true);
    const Axis ay = make_axis(series, spec.log_y, false);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + ax.frac(x) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - ay.frac(y)) * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(spec.title) + "</text>\n";
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 4; ++k) {
        const double fx = k / 4.0;
        const double vx = ax.lo + fx * (ax.hi - ax.lo);
        const double x = kLeft + fx * pw;
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(x) + "\" y2=\"" + num(kTop + ph + 5) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             tick_label(ax.log ? std::pow(10.0, vx) : vx) + "</text>\n";
        const double vy = ay.lo + fx * (ay.hi - ay.lo);
        const double y = kTop + (1.0 - fx) * ph;
        s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             tick_label(ay.log ? std::pow(10.0, vy) : vy) + "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(spec.x_label) +
         (spec.log_x ? " (log)" : "") + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + (spec.log_y ? " (log)" : "") + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
        std::string pts;
        const std::size_t n = std::min(sr.x.size(), sr.y.size());
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!usable(sr.x[i], spec.log_x) || !usable(sr.y[i], spec.log_y)) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(px(sr.x[i])) + "," + num(py(sr.y[i]));
            ++count;
        }
        if (count > 1)
            s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        else if (count == 1)
            s += "<circle cx=\"" + pts.substr(0, pts.find(',')) + "\" cy=\"" + pts.substr(pts.find(',') + 1) +
                 "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        const double ly = kTop + 14.0 + 16.0 * static_cast<double>(k);
        s += "<line x1=\"" + num(kWidth - kRight + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(kWidth - kRight + 30) +
             "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + num(kWidth - kRight + 34) + "\" y=\"" + num(ly) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(sr.label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace nordheim
