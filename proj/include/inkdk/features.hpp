#pragma once

#include "inkdk/ink.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace inkdk {

using Vec2 = std::array<double, 2>;

/// Path signature truncated after the second level.
///
/// level1 is the displacement; level2[i][j] is the second iterated integral
/// of coordinate i then j. For any path level2[i][j] + level2[j][i] equals
/// level1[i] * level1[j]; the antisymmetric part is the signed (Levy) area.
struct Sig2 {
    double level0 = 1.0;
    Vec2 level1{0.0, 0.0};
    std::array<Vec2, 2> level2{Vec2{0.0, 0.0}, Vec2{0.0, 0.0}};

    friend bool operator==(const Sig2&, const Sig2&) = default;
};

/// Signature of the straight segment p -> q: (1, d, d (x) d / 2).
Sig2 seg_signature(Point p, Point q) noexcept;

/// Chen's identity: signature of path A followed by path B.
Sig2 chen_concat(const Sig2& a, const Sig2& b) noexcept;

/// Left-to-right concatenation over a polyline. Fewer than two points give
/// the zero-displacement signature.
Sig2 path_signature(std::span<const Point> points) noexcept;

/// Signature over points [i - radius, i + radius] clamped to the stroke.
Sig2 window_signature(std::span<const Point> points, std::size_t i, int radius);

/// Unit tangent at point i by central difference (one-sided at the ends).
/// Zero differences widen the stencil until a nonzero one is found; a stroke
/// with no extent returns (1, 0). Throws TooShort for single-point strokes.
Vec2 direction_at(std::span<const Point> points, std::size_t i);

/// Axis k of the eight-direction frame, at 45 * k degrees.
Vec2 direction_axis(int k) noexcept;

/// Splits a unit vector onto the two axes bounding its 45-degree sector.
/// Throws NotUnit when | |u| - 1 | > 1e-9.
std::array<double, 8> decompose8(Vec2 u);

struct FeatureConfig {
    int sig_level = 2;
    bool use_dir8 = false;
    bool use_imaginary = false;
    int window_radius = 1;

    /// Channels carried by one stroke family (real or imaginary).
    int block_width() const noexcept;
    /// Total network input channels.
    int channels() const noexcept;
    /// Channel labels in render order: sig0, sig1x, sig1y, sig2xx, sig2xy,
    /// sig2yx, sig2yy, dir0..dir7, then the same with an "-im" suffix.
    std::vector<std::string> channel_labels() const;
    /// Throws ConfigError on out-of-range fields.
    void validate() const;

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct PointFeatures {
    Sig2 sig;
    std::array<double, 8> dir8{};
};

struct StrokeFeatures {
    StrokeKind kind = StrokeKind::real;
    /// One entry per stroke point; empty for imaginary strokes when the
    /// configuration does not use them.
    std::vector<PointFeatures> points;
};

/// Per-point features for every stroke, aligned with ink.strokes().
std::vector<StrokeFeatures> point_features(const Ink& ink, const FeatureConfig& config);

/// The block_width() values of one point, in channel-label order.
void flatten_features(const PointFeatures& f, const FeatureConfig& config, std::span<double> out);

} // namespace inkdk
