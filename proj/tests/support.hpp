#pragma once

#include "inkdk/features.hpp"
#include "inkdk/ink.hpp"
#include "inkdk/rng.hpp"

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace inkdk::testing {

// Second iterated integrals by direct summation over a fine subdivision of
// every segment (midpoint values, so piecewise-linear paths are exact up to
// rounding).
inline Sig2 riemann_signature(std::span<const Point> pts, int subdivisions = 10000) {
    Sig2 s;
    if (pts.size() < 2) return s;
    std::array<double, 2> x{0.0, 0.0};
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const std::array<double, 2> d{(pts[k].x - pts[k - 1].x) / subdivisions,
                                      (pts[k].y - pts[k - 1].y) / subdivisions};
        for (int m = 0; m < subdivisions; ++m) {
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) s.level2[i][j] += (x[i] + d[i] / 2.0) * d[j];
            }
            x[0] += d[0];
            x[1] += d[1];
        }
    }
    s.level1 = {pts.back().x - pts.front().x, pts.back().y - pts.front().y};
    return s;
}

inline double sig_distance(const Sig2& a, const Sig2& b) {
    double d = std::abs(a.level0 - b.level0);
    for (int i = 0; i < 2; ++i) {
        d = std::max(d, std::abs(a.level1[i] - b.level1[i]));
        for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(a.level2[i][j] - b.level2[i][j]));
    }
    return d;
}

inline std::vector<Point> random_polyline(Rng& rng, int points, double lo = -1.0, double hi = 1.0) {
    std::vector<Point> p;
    for (int i = 0; i < points; ++i) p.push_back({uniform(rng, lo, hi), uniform(rng, lo, hi)});
    return p;
}

// Five bars and two posts packed into the left third of the unit box.
inline Ink left_third_glyph() {
    std::vector<Stroke> strokes;
    for (int k = 0; k < 5; ++k) {
        const double y = 0.1 + 0.2 * k;
        strokes.emplace_back(std::vector<Point>{{0.02, y}, {0.3, y}});
    }
    strokes.emplace_back(std::vector<Point>{{0.1, 0.05}, {0.1, 0.95}});
    strokes.emplace_back(std::vector<Point>{{0.25, 0.05}, {0.25, 0.95}});
    return Ink(std::move(strokes));
}

} // namespace inkdk::testing
