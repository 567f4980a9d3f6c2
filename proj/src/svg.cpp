#include "lossrobust/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lossrobust {
namespace svg {

namespace {

constexpr int kPanelWidth = 400;
constexpr int kPanelHeight = 320;
constexpr int kMarginLeft = 62;
constexpr int kMarginRight = 18;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 46;
constexpr int kPanelsPerRow = 3;
constexpr int kTitleBand = 34;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range padded_range(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

} // namespace

std::string render(const std::vector<Panel>& panels, const std::string& title,
                   const std::string& x_label, const std::string& y_label) {
    if (panels.empty()) throw std::invalid_argument("svg::render: no panels");
    std::size_t total_points = 0;
    for (const Panel& p : panels)
        for (const Series& s : p.series) total_points += s.points.size();
    if (total_points == 0) throw std::invalid_argument("svg::render: no data points");

    int n_panels = static_cast<int>(panels.size());
    int cols = std::min(n_panels, kPanelsPerRow);
    int panel_rows = (n_panels + kPanelsPerRow - 1) / kPanelsPerRow;
    int width = cols * kPanelWidth;
    int height = kTitleBand + panel_rows * kPanelHeight;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + fmt_px(width / 2.0) +
           "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape_text(title) + "</text>\n";

    for (int pi = 0; pi < n_panels; ++pi) {
        const Panel& panel = panels[static_cast<std::size_t>(pi)];
        double ox = (pi % kPanelsPerRow) * kPanelWidth;
        double oy = kTitleBand + (pi / kPanelsPerRow) * kPanelHeight;
        double px0 = ox + kMarginLeft;
        double px1 = ox + kPanelWidth - kMarginRight;
        double py0 = oy + kMarginTop;
        double py1 = oy + kPanelHeight - kMarginBottom;

        double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
        bool seen = false;
        for (const Series& s : panel.series) {
            for (auto [x, y] : s.points) {
                if (!seen) {
                    xmin = xmax = x;
                    ymin = ymax = y;
                    seen = true;
                } else {
                    xmin = std::min(xmin, x);
                    xmax = std::max(xmax, x);
                    ymin = std::min(ymin, y);
                    ymax = std::max(ymax, y);
                }
            }
        }
        Range xr = padded_range(xmin, xmax);
        Range yr = padded_range(ymin, ymax);
        auto sx = [&](double v) { return px0 + (v - xr.lo) / (xr.hi - xr.lo) * (px1 - px0); };
        auto sy = [&](double v) { return py1 - (v - yr.lo) / (yr.hi - yr.lo) * (py1 - py0); };

        out += "<text x=\"" + fmt_px((px0 + px1) / 2.0) + "\" y=\"" + fmt_px(py0 - 12.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
               escape_text(panel.title) + "</text>\n";
        out += "<rect x=\"" + fmt_px(px0) + "\" y=\"" + fmt_px(py0) + "\" width=\"" +
               fmt_px(px1 - px0) + "\" height=\"" + fmt_px(py1 - py0) +
               "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

        for (int t = 0; t < 5; ++t) {
            double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
            double gx = sx(fx);
            out += "<line x1=\"" + fmt_px(gx) + "\" y1=\"" + fmt_px(py1) + "\" x2=\"" + fmt_px(gx) +
                   "\" y2=\"" + fmt_px(py1 + 5.0) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            out += "<text x=\"" + fmt_px(gx) + "\" y=\"" + fmt_px(py1 + 18.0) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
                   fmt_tick(fx) + "</text>\n";
            double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
            double gy = sy(fy);
            out += "<line x1=\"" + fmt_px(px0 - 5.0) + "\" y1=\"" + fmt_px(gy) + "\" x2=\"" +
                   fmt_px(px0) + "\" y2=\"" + fmt_px(gy) +
                   "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            out += "<text x=\"" + fmt_px(px0 - 8.0) + "\" y=\"" + fmt_px(gy + 3.0) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
                   fmt_tick(fy) + "</text>\n";
        }

        out += "<text x=\"" + fmt_px((px0 + px1) / 2.0) + "\" y=\"" + fmt_px(py1 + 36.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape_text(x_label) + "</text>\n";
        out += "<text x=\"" + fmt_px(ox + 16.0) + "\" y=\"" + fmt_px((py0 + py1) / 2.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 " +
               fmt_px(ox + 16.0) + " " + fmt_px((py0 + py1) / 2.0) + ")\">" +
               escape_text(y_label) + "</text>\n";

        int legend_row = 0;
        for (std::size_t si = 0; si < panel.series.size(); ++si) {
            const Series& s = panel.series[si];
            const char* color = kPalette[si % kPaletteSize];
            if (!s.points.empty()) {
                std::string pts;
                for (auto [x, y] : s.points) {
                    if (!pts.empty()) pts += ' ';
                    pts += fmt_px(sx(x)) + "," + fmt_px(sy(y));
                }
                out += "<polyline fill=\"none\" stroke=\"";
                out += color;
                out += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
            }
            double ly = py0 + 14.0 + 15.0 * legend_row;
            out += "<line x1=\"" + fmt_px(px1 - 86.0) + "\" y1=\"" + fmt_px(ly - 3.0) + "\" x2=\"" +
                   fmt_px(px1 - 68.0) + "\" y2=\"" + fmt_px(ly - 3.0) + "\" stroke=\"";
            out += color;
            out += "\" stroke-width=\"2\"/>\n";
            out += "<text x=\"" + fmt_px(px1 - 63.0) + "\" y=\"" + fmt_px(ly) +
                   "\" font-family=\"sans-serif\" font-size=\"10\">" + escape_text(s.label) +
                   "</text>\n";
            ++legend_row;
        }
    }
    out += "</svg>\n";
    return out;
}

} // namespace svg
} // namespace lossrobust
