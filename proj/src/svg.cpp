#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace dynega::svg {

std::string num(double v) {
    if (std::abs(v) < 0.005) v = 0.0;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

Canvas::Canvas(double width, double height) : width_(width), height_(height) {}

void Canvas::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
                  std::string_view dash) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + std::string(dash) + "\"";
    body_ += "/>\n";
}

void Canvas::polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width) {
    if (pts.empty()) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
             "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) body_ += ' ';
        body_ += num(pts[i].first) + "," + num(pts[i].second);
    }
    body_ += "\"/>\n";
}

void Canvas::rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) + "\"/>\n";
}

void Canvas::circle(double cx, double cy, double r, std::string_view fill) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
             std::string(fill) + "\"/>\n";
}

void Canvas::text(double x, double y, std::string_view content, double size, std::string_view anchor,
                  std::string_view fill, double rotate) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + std::string(anchor) + "\" fill=\"" +
             std::string(fill) + "\"";
    if (rotate != 0.0) body_ += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
    body_ += ">" + escape(content) + "</text>\n";
}

void Canvas::arrow(double x1, double y1, double x2, double y2, std::string_view stroke, double width) {
    line(x1, y1, x2, y2, stroke, width);
    const double dx = x2 - x1, dy = y2 - y1;
    const double len = std::hypot(dx, dy);
    if (len < 1e-9) return;
    const double head = std::min(6.0, 0.4 * len);
    const double ux = dx / len, uy = dy / len;
    const double bx = x2 - head * ux, by = y2 - head * uy;
    const double px = -uy * head * 0.5, py = ux * head * 0.5;
    body_ += "<polygon points=\"" + num(x2) + "," + num(y2) + " " + num(bx + px) + "," + num(by + py) + " " +
             num(bx - px) + "," + num(by - py) + "\" fill=\"" + std::string(stroke) + "\"/>\n";
}

std::string Canvas::str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
}

double Axis::map(double v) const {
    if (hi == lo) return 0.5 * (px_lo + px_hi);
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
}

std::pair<double, double> padded_range(double lo, double hi, double pad) {
    if (hi < lo) std::swap(lo, hi);
    if (hi - lo < 1e-12) {
        const double w = std::max(1.0, std::abs(lo)) * 0.5;
        return {lo - w, hi + w};
    }
    const double span = hi - lo;
    return {lo - pad * span, hi + pad * span};
}

std::vector<double> ticks(double lo, double hi, int approx) {
    std::vector<double> out;
    if (!(hi > lo)) return out;
    const double raw = (hi - lo) / approx;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
    return out;
}

std::string ramp_colour(double t) {
    // Viridis-like anchors.
    static constexpr std::array<std::array<double, 3>, 5> anchors{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * (anchors.size() - 1);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), anchors.size() - 2);
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(anchors[i][c] + f * (anchors[i + 1][c] - anchors[i][c])));
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

} // namespace dynega::svg
