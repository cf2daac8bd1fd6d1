#pragma once

#include <string>
#include <vector>

namespace securelat::cli::svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    /// Draw markers instead of a connected line (for sparse event data).
    bool markers = false;
};

/// Vertically stacked line plots rendered as plain SVG polylines.
std::string render(const std::string& title, const std::vector<Panel>& panels, int width = 900, int panel_height = 260);

}  // namespace securelat::cli::svg
