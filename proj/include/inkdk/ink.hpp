#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace inkdk {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

enum class StrokeKind { real, imaginary };

const char* to_string(StrokeKind kind) noexcept;

/// A pen trajectory. Real strokes are pen-down; imaginary strokes are
/// synthesized pen-up movements.
class Stroke {
public:
    /// Throws InvalidInk for an empty point list or non-finite coordinates.
    explicit Stroke(std::vector<Point> points, StrokeKind kind = StrokeKind::real);

    const std::vector<Point>& points() const noexcept { return points_; }
    StrokeKind kind() const noexcept { return kind_; }
    bool is_real() const noexcept { return kind_ == StrokeKind::real; }
    std::size_t size() const noexcept { return points_.size(); }

    friend bool operator==(const Stroke&, const Stroke&) = default;

private:
    std::vector<Point> points_;
    StrokeKind kind_;
};

/// One handwriting sample: strokes in writing order plus an optional label.
/// Always holds at least one real stroke.
class Ink {
public:
    explicit Ink(std::vector<Stroke> strokes, std::optional<std::string> label = std::nullopt);

    const std::vector<Stroke>& strokes() const noexcept { return strokes_; }
    const std::optional<std::string>& label() const noexcept { return label_; }
    std::size_t real_stroke_count() const noexcept;
    std::size_t point_count() const noexcept;

    Ink with_label(std::optional<std::string> label) const;

    friend bool operator==(const Ink&, const Ink&) = default;

private:
    std::vector<Stroke> strokes_;
    std::optional<std::string> label_;
};

struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const noexcept { return max_x - min_x; }
    double height() const noexcept { return max_y - min_y; }
    bool contains(Point p, double tol = 0.0) const noexcept {
        return p.x >= min_x - tol && p.x <= max_x + tol && p.y >= min_y - tol &&
               p.y <= max_y + tol;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Tight box over the real-stroke points; imaginary strokes are ignored.
Rect bounding_box(const Ink& ink);

/// Maps the real-stroke box onto [0,1]^2. With preserve_aspect the larger
/// extent spans [0,1] and the other is centered; a zero extent lands on 0.5.
/// Imaginary strokes follow the same map. Throws DegenerateInk when every
/// real point coincides.
Ink normalize_to_box(const Ink& ink, bool preserve_aspect = true);

/// Re-walks every stroke by arc length at a fixed spacing. Stroke endpoints
/// are kept exactly; the last gap may be shorter than the spacing.
Ink resample_equidistant(const Ink& ink, double spacing);

/// Inserts a straight two-point imaginary stroke between every consecutive
/// pair of real strokes. Existing imaginary strokes are kept in place.
Ink add_imaginary_strokes(const Ink& ink);

/// Applies fn to every point of every stroke, keeping structure and label.
template <class F>
Ink transform_points(const Ink& ink, F&& fn) {
    std::vector<Stroke> out;
    out.reserve(ink.strokes().size());
    for (const Stroke& s : ink.strokes()) {
        std::vector<Point> pts;
        pts.reserve(s.size());
        for (const Point& p : s.points()) pts.push_back(fn(p));
        out.emplace_back(std::move(pts), s.kind());
    }
    return Ink(std::move(out), ink.label());
}

} // namespace inkdk
