#include "odediscover/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "odediscover/errors.hpp"

namespace odediscover::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v, const char* spec = "%.4g") {
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0.0, hi = 1.0;

    double map(double v) const { return log ? std::log10(v) : v; }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

    void fit(const std::vector<double>& mapped) {
        if (mapped.empty()) return;
        lo = *std::min_element(mapped.begin(), mapped.end());
        hi = *std::max_element(mapped.begin(), mapped.end());
        if (log) {
            lo = std::floor(lo);
            hi = std::ceil(hi);
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }

    std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            const int step = std::max(1, int(std::ceil((hi - lo) / 8.0)));
            for (double e = lo; e <= hi + 1e-9; e += step) t.push_back(e);
            return t;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
        return t;
    }

    std::string label(double mapped) const { return log ? "1e" + fmt(mapped, "%.0f") : fmt(mapped); }
};

}  // namespace

std::string render(const Chart& chart) {
    const double left = 70, right = 150, top = 40, bottom = 55;
    const double pw = chart.width - left - right, ph = chart.height - top - bottom;

    Axis ax{chart.log_x}, ay{chart.log_y};
    std::vector<double> xs, ys;
    for (const auto& s : chart.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
                xs.push_back(ax.map(s.x[i]));
                ys.push_back(ay.map(s.y[i]));
            }
    ax.fit(xs);
    ay.fit(ys);
    auto px = [&](double m) { return left + (m - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double m) { return top + ph - (m - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\"" << chart.height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">"
       << escape(chart.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : ax.ticks()) {
        const double x = px(t);
        os << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\"" << top + ph + 5
           << "\" stroke=\"black\"/>";
        os << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << ax.label(t)
           << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
           << "\" stroke=\"black\"/>";
        os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << ay.label(t)
           << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << chart.height - 15 << "\" text-anchor=\"middle\">"
       << escape(chart.x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(chart.y_label) << "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        std::ostringstream pts;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (ax.usable(s.x[i]) && ay.usable(s.y[i]))
                pts << fmt(px(ax.map(s.x[i])), "%.2f") << ',' << fmt(py(ay.map(s.y[i])), "%.2f") << ' ';
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
           << "\"/>\n";
        const double ly = top + 14 + 16 * double(k);
        os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
        os << "<text x=\"" << left + pw + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_chart(const std::string& path, const Chart& chart) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << render(chart);
    if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace odediscover::svg
