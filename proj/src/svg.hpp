#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynega::svg {

// Minimal deterministic SVG writer; coordinates are printed with 2 decimals.
class Canvas {
public:
    Canvas(double width, double height);

    void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
              std::string_view dash = {});
    void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width = 1.5);
    void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none");
    void circle(double cx, double cy, double r, std::string_view fill);
    void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start",
              std::string_view fill = "#222", double rotate = 0.0);
    void arrow(double x1, double y1, double x2, double y2, std::string_view stroke, double width);

    std::string str() const;

private:
    double width_;
    double height_;
    std::string body_;
};

std::string num(double v);
std::string escape(std::string_view s);

// Plot-area mapping from data to pixel space.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    double px_lo = 0.0;
    double px_hi = 1.0;
    double map(double v) const;
};

// Padded data range; degenerate ranges are widened.
std::pair<double, double> padded_range(double lo, double hi, double pad = 0.05);

std::vector<double> ticks(double lo, double hi, int approx = 6);

// Dark blue to yellow ramp, t in [0, 1].
std::string ramp_colour(double t);

} // namespace dynega::svg
