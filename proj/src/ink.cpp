#include "inkdk/ink.hpp"

#include "inkdk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inkdk {

const char* to_string(StrokeKind kind) noexcept {
    return kind == StrokeKind::real ? "real" : "imaginary";
}

Stroke::Stroke(std::vector<Point> points, StrokeKind kind)
    : points_(std::move(points)), kind_(kind) {
    if (points_.empty()) throw InvalidInk("stroke has no points");
    for (const Point& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidInk("stroke point is not finite");
    }
}

Ink::Ink(std::vector<Stroke> strokes, std::optional<std::string> label)
    : strokes_(std::move(strokes)), label_(std::move(label)) {
    if (real_stroke_count() == 0) throw InvalidInk("ink has no real stroke");
}

std::size_t Ink::real_stroke_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(strokes_.begin(), strokes_.end(), [](const Stroke& s) { return s.is_real(); }));
}

std::size_t Ink::point_count() const noexcept {
    std::size_t n = 0;
    for (const Stroke& s : strokes_) n += s.size();
    return n;
}

Ink Ink::with_label(std::optional<std::string> label) const {
    Ink copy = *this;
    copy.label_ = std::move(label);
    return copy;
}

Rect bounding_box(const Ink& ink) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Rect r{inf, inf, -inf, -inf};
    for (const Stroke& s : ink.strokes()) {
        if (!s.is_real()) continue;
        for (const Point& p : s.points()) {
            r.min_x = std::min(r.min_x, p.x);
            r.min_y = std::min(r.min_y, p.y);
            r.max_x = std::max(r.max_x, p.x);
            r.max_y = std::max(r.max_y, p.y);
        }
    }
    return r;
}

Ink normalize_to_box(const Ink& ink, bool preserve_aspect) {
    const Rect box = bounding_box(ink);
    const double w = box.width();
    const double h = box.height();
    if (w <= 0.0 && h <= 0.0) throw DegenerateInk("all ink points coincide");

    double sx = 0.0;
    double sy = 0.0;
    if (preserve_aspect) {
        sx = sy = 1.0 / std::max(w, h);
    } else {
        sx = w > 0.0 ? 1.0 / w : 0.0;
        sy = h > 0.0 ? 1.0 / h : 0.0;
    }
    const double ox = (1.0 - w * sx) / 2.0;
    const double oy = (1.0 - h * sy) / 2.0;
    return transform_points(ink, [&](Point p) {
        return Point{(p.x - box.min_x) * sx + ox, (p.y - box.min_y) * sy + oy};
    });
}

namespace {

std::vector<Point> resample_polyline(const std::vector<Point>& pts, double spacing) {
    if (pts.size() == 1) return pts;

    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    const double total = cum.back();

    std::vector<Point> out;
    out.push_back(pts.front());
    const double stop = total - 1e-12 * std::max(1.0, total);
    std::size_t seg = 1;
    for (std::size_t k = 1;; ++k) {
        const double s = static_cast<double>(k) * spacing;
        if (s >= stop) break;
        while (seg + 1 < pts.size() && cum[seg] < s) ++seg;
        const double len = cum[seg] - cum[seg - 1];
        const double t = len > 0.0 ? (s - cum[seg - 1]) / len : 0.0;
        const Point& a = pts[seg - 1];
        const Point& b = pts[seg];
        out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    out.push_back(pts.back());
    return out;
}

} // namespace

Ink resample_equidistant(const Ink& ink, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw InvalidSpacing("resampling spacing must be positive and finite");
    std::vector<Stroke> out;
    out.reserve(ink.strokes().size());
    for (const Stroke& s : ink.strokes())
        out.emplace_back(resample_polyline(s.points(), spacing), s.kind());
    return Ink(std::move(out), ink.label());
}

Ink add_imaginary_strokes(const Ink& ink) {
    std::vector<Stroke> out;
    out.reserve(2 * ink.strokes().size());
    const Stroke* previous_real = nullptr;
    for (const Stroke& s : ink.strokes()) {
        if (s.is_real()) {
            if (previous_real != nullptr) {
                out.emplace_back(std::vector<Point>{previous_real->points().back(), s.points().front()},
                                 StrokeKind::imaginary);
            }
            previous_real = &s;
        }
        out.push_back(s);
    }
    return Ink(std::move(out), ink.label());
}

} // namespace inkdk
