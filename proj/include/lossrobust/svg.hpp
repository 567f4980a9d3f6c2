#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lossrobust {
namespace svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points; // (x, y) in data units
};

struct Panel {
    std::string title;
    std::vector<Series> series;
};

/**
 * @brief Renders panels side by side (three per row) as a static SVG chart:
 * one polyline per series, shared styling, per-panel axes with five ticks.
 * Output bytes depend only on the inputs.  Throws when no panel contains a
 * point.
 */
std::string render(const std::vector<Panel>& panels, const std::string& title,
                   const std::string& x_label, const std::string& y_label);

} // namespace svg
} // namespace lossrobust
