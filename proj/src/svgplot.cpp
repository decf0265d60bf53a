#include "mlab/svgplot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace mlab {

namespace {

constexpr double kWidth = 640;      ///< canvas size in CSS pixels
constexpr double kHeight = 480;
constexpr double kMarginL = 70;     ///< room for the y axis and its labels
constexpr double kMarginR = 150;    ///< room for the legend column
constexpr double kMarginT = 40;
constexpr double kMarginB = 55;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
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

/// Round tick spacing down to a 1/2/5 decade multiple.
double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm >= 5) return 5 * mag;
    if (norm >= 2) return 2 * mag;
    return mag;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void SvgPlot::define_class(const std::string& name, const std::string& shape,
                           const std::string& color, double size) {
    classes_.push_back(MarkerClass{name, shape, color, size, false});
}

void SvgPlot::add_marker(double x, double y, const std::string& class_name) {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i].name == class_name) {
            classes_[i].used = true;
            markers_.push_back(Marker{x, y, i});
            return;
        }
    }
    throw std::invalid_argument("unknown marker class '" + class_name + "'");
}

void SvgPlot::add_path(const std::vector<std::pair<double, double>>& points,
                       const std::string& color, bool dashed) {
    paths_.push_back(Path{points, color, dashed});
}

std::string SvgPlot::render() const {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const Marker& m : markers_) {
        x_min = std::min(x_min, m.x); x_max = std::max(x_max, m.x);
        y_min = std::min(y_min, m.y); y_max = std::max(y_max, m.y);
    }
    for (const Path& p : paths_)
        for (const auto& [x, y] : p.points) {
            x_min = std::min(x_min, x); x_max = std::max(x_max, x);
            y_min = std::min(y_min, y); y_max = std::max(y_max, y);
        }
    if (!(x_min <= x_max)) { x_min = -1; x_max = 1; y_min = -1; y_max = 1; }
    if (x_max - x_min < 1e-12) { x_min -= 0.5; x_max += 0.5; }
    if (y_max - y_min < 1e-12) { y_min -= 0.5; y_max += 0.5; }
    const double x_pad = 0.08 * (x_max - x_min);
    const double y_pad = 0.08 * (y_max - y_min);
    x_min -= x_pad; x_max += x_pad;
    y_min -= y_pad; y_max += y_pad;

    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    const auto px = [&](double x) {
        return kMarginL + (x - x_min) / (x_max - x_min) * plot_w;
    };
    const auto py = [&](double y) {
        return kMarginT + (y_max - y) / (y_max - y_min) * plot_h;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
           "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) +
           " " + fmt(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(kMarginL + plot_w / 2) + "\" y=\"24\" "
           "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           xml_escape(title_) + "</text>\n";

    // frame
    svg += "<rect x=\"" + fmt(kMarginL) + "\" y=\"" + fmt(kMarginT) +
           "\" width=\"" + fmt(plot_w) + "\" height=\"" + fmt(plot_h) +
           "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

    // ticks and grid
    const double xs = nice_step(x_max - x_min);
    for (double t = std::ceil(x_min / xs) * xs; t <= x_max + 1e-12; t += xs) {
        const double gx = px(t);
        svg += "<line x1=\"" + fmt(gx) + "\" y1=\"" + fmt(kMarginT) + "\" x2=\"" +
               fmt(gx) + "\" y2=\"" + fmt(kMarginT + plot_h) +
               "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        svg += "<text x=\"" + fmt(gx) + "\" y=\"" + fmt(kMarginT + plot_h + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">" + fmt(std::abs(t) < xs * 1e-9 ? 0.0 : t) +
               "</text>\n";
    }
    const double ys = nice_step(y_max - y_min);
    for (double t = std::ceil(y_min / ys) * ys; t <= y_max + 1e-12; t += ys) {
        const double gy = py(t);
        svg += "<line x1=\"" + fmt(kMarginL) + "\" y1=\"" + fmt(gy) + "\" x2=\"" +
               fmt(kMarginL + plot_w) + "\" y2=\"" + fmt(gy) +
               "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        svg += "<text x=\"" + fmt(kMarginL - 8) + "\" y=\"" + fmt(gy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">" + fmt(std::abs(t) < ys * 1e-9 ? 0.0 : t) +
               "</text>\n";
    }

    // axis labels
    svg += "<text x=\"" + fmt(kMarginL + plot_w / 2) + "\" y=\"" +
           fmt(kHeight - 12) + "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"13\">" +
           xml_escape(x_label_) + "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt(kMarginT + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 " +
           fmt(kMarginT + plot_h / 2) + ")\">" + xml_escape(y_label_) +
           "</text>\n";

    for (const Path& p : paths_) {
        if (p.points.empty()) continue;
        std::string d = "M";
        for (const auto& [x, y] : p.points)
            d += " " + fmt(px(x)) + " " + fmt(py(y));
        svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + p.color +
               "\" stroke-width=\"1.5\"" +
               (p.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    }

    for (const Marker& m : markers_) {
        const MarkerClass& cls = classes_[m.class_index];
        const double cx = px(m.x), cy = py(m.y), r = cls.size;
        if (cls.shape == "circle") {
            svg += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" +
                   fmt(r) + "\" fill=\"" + cls.color + "\"/>\n";
        } else if (cls.shape == "square") {
            svg += "<rect x=\"" + fmt(cx - r) + "\" y=\"" + fmt(cy - r) +
                   "\" width=\"" + fmt(2 * r) + "\" height=\"" + fmt(2 * r) +
                   "\" fill=\"" + cls.color + "\"/>\n";
        } else if (cls.shape == "diamond") {
            svg += "<path d=\"M " + fmt(cx) + " " + fmt(cy - r) + " L " +
                   fmt(cx + r) + " " + fmt(cy) + " L " + fmt(cx) + " " +
                   fmt(cy + r) + " L " + fmt(cx - r) + " " + fmt(cy) +
                   " Z\" fill=\"" + cls.color + "\"/>\n";
        } else {  // cross
            svg += "<path d=\"M " + fmt(cx - r) + " " + fmt(cy - r) + " L " +
                   fmt(cx + r) + " " + fmt(cy + r) + " M " + fmt(cx - r) + " " +
                   fmt(cy + r) + " L " + fmt(cx + r) + " " + fmt(cy - r) +
                   "\" stroke=\"" + cls.color + "\" stroke-width=\"2\" "
                   "fill=\"none\"/>\n";
        }
    }

    // legend for the classes that appeared
    double ly = kMarginT + 10;
    const double lx = kWidth - kMarginR + 18;
    for (const MarkerClass& cls : classes_) {
        if (!cls.used) continue;
        if (cls.shape == "circle")
            svg += "<circle cx=\"" + fmt(lx) + "\" cy=\"" + fmt(ly) + "\" r=\"" +
                   fmt(cls.size) + "\" fill=\"" + cls.color + "\"/>\n";
        else if (cls.shape == "square")
            svg += "<rect x=\"" + fmt(lx - cls.size) + "\" y=\"" +
                   fmt(ly - cls.size) + "\" width=\"" + fmt(2 * cls.size) +
                   "\" height=\"" + fmt(2 * cls.size) + "\" fill=\"" +
                   cls.color + "\"/>\n";
        else if (cls.shape == "diamond")
            svg += "<path d=\"M " + fmt(lx) + " " + fmt(ly - cls.size) + " L " +
                   fmt(lx + cls.size) + " " + fmt(ly) + " L " + fmt(lx) + " " +
                   fmt(ly + cls.size) + " L " + fmt(lx - cls.size) + " " +
                   fmt(ly) + " Z\" fill=\"" + cls.color + "\"/>\n";
        else
            svg += "<path d=\"M " + fmt(lx - cls.size) + " " +
                   fmt(ly - cls.size) + " L " + fmt(lx + cls.size) + " " +
                   fmt(ly + cls.size) + " M " + fmt(lx - cls.size) + " " +
                   fmt(ly + cls.size) + " L " + fmt(lx + cls.size) + " " +
                   fmt(ly - cls.size) + "\" stroke=\"" + cls.color +
                   "\" stroke-width=\"2\" fill=\"none\"/>\n";
        svg += "<text x=\"" + fmt(lx + 12) + "\" y=\"" + fmt(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" +
               xml_escape(cls.name) + "</text>\n";
        ly += 20;
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace mlab
