#include "securelat/cli/svg.hpp"

#include "securelat/cli/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace securelat::cli::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render(const std::string& title, const std::vector<Panel>& panels, int width, int panel_height) {
    const int top = 40, left = 70, right = 160, bottom_pad = 45;
    const int height = top + static_cast<int>(panels.size()) * (panel_height + bottom_pad) + 10;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                      std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" + esc(title) +
           "</text>\n";

    const double pw = width - left - right;
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const double y0 = top + static_cast<double>(p) * (panel_height + bottom_pad);
        const double ph = panel_height - 20;

        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        for (const auto& s : panel.series)
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = -1, ymax = 1;
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymin -= 1, ymax += 1;
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
        auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
        auto sy = [&](double y) { return y0 + 20 + (ymax - y) / (ymax - ymin) * ph; };

        out += "<g>\n<text x=\"" + std::to_string(left) + "\" y=\"" + num(y0 + 14) + "\" font-weight=\"bold\">" +
               esc(panel.title) + "</text>\n";
        out += "<rect x=\"" + std::to_string(left) + "\" y=\"" + num(y0 + 20) + "\" width=\"" + num(pw) + "\" height=\"" +
               num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double yv = ymin + (ymax - ymin) * t / 4.0;
            const double xv = xmin + (xmax - xmin) * t / 4.0;
            out += "<line x1=\"" + std::to_string(left) + "\" x2=\"" + num(left + pw) + "\" y1=\"" + num(sy(yv)) +
                   "\" y2=\"" + num(sy(yv)) + "\" stroke=\"#ddd\"/>\n";
            out += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" +
                   esc(fmt(round12(yv)).substr(0, 8)) + "</text>\n";
            out += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(y0 + 20 + ph + 16) + "\" text-anchor=\"middle\">" +
                   esc(fmt(round12(xv)).substr(0, 8)) + "</text>\n";
        }
        out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(y0 + 20 + ph + 32) + "\" text-anchor=\"middle\">" +
               esc(panel.xlabel) + "</text>\n";
        out += "<text transform=\"translate(16," + num(y0 + 20 + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
               esc(panel.ylabel) + "</text>\n";

        for (std::size_t s = 0; s < panel.series.size(); ++s) {
            const auto& ser = panel.series[s];
            const std::string color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
            const std::size_t n = std::min(ser.x.size(), ser.y.size());
            if (panel.markers) {
                for (std::size_t i = 0; i < n; ++i)
                    out += "<circle cx=\"" + num(sx(ser.x[i])) + "\" cy=\"" + num(sy(ser.y[i])) + "\" r=\"1.6\" fill=\"" +
                           color + "\"/>\n";
            } else {
                out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\"" +
                       (ser.dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"";
                for (std::size_t i = 0; i < n; ++i) {
                    if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
                    out += num(sx(ser.x[i])) + "," + num(sy(ser.y[i])) + " ";
                }
                out += "\"/>\n";
            }
            const double ly = y0 + 34 + 16.0 * static_cast<double>(s);
            out += "<line x1=\"" + num(left + pw + 10) + "\" x2=\"" + num(left + pw + 30) + "\" y1=\"" + num(ly) +
                   "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
            out += "<text x=\"" + num(left + pw + 34) + "\" y=\"" + num(ly + 4) + "\">" + esc(ser.label) + "</text>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace securelat::cli::svg
