#include "zrp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace zrp {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;
    double map(double v, double a, double b) const {
        double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
};

Axis make_axis(const std::vector<const std::vector<double>*>& data, bool log, const std::vector<double>* lows = nullptr,
               const std::vector<double>* highs = nullptr) {
    Axis ax;
    ax.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto take = [&](double v) {
        if (!std::isfinite(v) || (log && v <= 0)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (auto* v : data)
        for (double x : *v) take(x);
    if (lows)
        for (double x : *lows) take(x);
    if (highs)
        for (double x : *highs) take(x);
    if (!std::isfinite(lo)) lo = log ? 1 : 0, hi = log ? 10 : 1;
    if (hi <= lo) {
        double pad = log ? 2.0 : std::max(1e-12, std::abs(lo) * 0.1 + 1e-12);
        if (log) lo /= pad, hi *= pad;
        else lo -= pad, hi += pad;
    } else if (!log) {
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    ax.lo = lo;
    ax.hi = hi;
    return ax;
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
    std::vector<const std::vector<double>*> xs, ys;
    std::vector<double> lows, highs;
    for (const auto& s : plot.series) {
        xs.push_back(&s.x);
        ys.push_back(&s.y);
        for (std::size_t i = 0; i < s.err.size() && i < s.y.size(); ++i) {
            lows.push_back(s.y[i] - s.err[i]);
            highs.push_back(s.y[i] + s.err[i]);
        }
    }
    Axis ax = make_axis(xs, plot.logx), ay = make_axis(ys, plot.logy, &lows, &highs);
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title) << "</text>\n";
    o << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double t = i / 4.0;
        double xv = ax.log ? std::pow(10.0, std::log10(ax.lo) + t * (std::log10(ax.hi) - std::log10(ax.lo))) : ax.lo + t * (ax.hi - ax.lo);
        double yv = ay.log ? std::pow(10.0, std::log10(ay.lo) + t * (std::log10(ay.hi) - std::log10(ay.lo))) : ay.lo + t * (ay.hi - ay.lo);
        double px = x0 + t * (x1 - x0), py = y0 + t * (y1 - y0);
        o << "<text x=\"" << px << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        o << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
    }
    o << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(plot.xlabel)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (y0 + y1) / 2
      << ")\">" << escape(plot.ylabel) << "</text>\n";
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = kColors[k % 8];
        std::ostringstream path;
        bool pen = false;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            bool ok = std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && (!ax.log || s.x[i] > 0) && (!ay.log || s.y[i] > 0);
            if (!ok) {
                pen = false;
                continue;
            }
            double px = ax.map(s.x[i], x0, x1), py = ay.map(s.y[i], y0, y1);
            path << (pen ? " L" : " M") << fmt(px) << ' ' << fmt(py);
            pen = true;
            if (s.markers) o << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
            if (i < s.err.size() && s.err[i] > 0) {
                double lo = s.y[i] - s.err[i], hi = s.y[i] + s.err[i];
                if (!ay.log || lo > 0)
                    o << "<line x1=\"" << fmt(px) << "\" x2=\"" << fmt(px) << "\" y1=\"" << fmt(ay.map(lo, y0, y1)) << "\" y2=\""
                      << fmt(ay.map(hi, y0, y1)) << "\" stroke=\"" << color << "\"/>\n";
            }
        }
        o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        double ly = y1 + 14 + 18 * static_cast<double>(k);
        o << "<line x1=\"" << x1 + 10 << "\" x2=\"" << x1 + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << x1 + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace zrp
