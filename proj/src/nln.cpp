#include "inkdk/nln.hpp"

#include "inkdk/error.hpp"
#include "inkdk/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace inkdk {

namespace {

// Evaluates a piecewise-linear function given by its values at 0..n.
double interpolate(const std::vector<double>& knots, double x) noexcept {
    const int n = static_cast<int>(knots.size()) - 1;
    if (!(x > 0.0)) return knots.front();
    if (x >= n) return knots.back();
    const int k = static_cast<int>(std::floor(x));
    const double frac = x - k;
    return knots[k] + frac * (knots[k + 1] - knots[k]);
}

} // namespace

double CoordinateMap::operator()(double x) const noexcept { return interpolate(knots, x); }

double CoordinateMap::inverse(double y) const noexcept {
    if (!(y > knots.front())) return 0.0;
    if (y >= knots.back()) return static_cast<double>(n());
    const auto it = std::upper_bound(knots.begin(), knots.end(), y);
    const int k = static_cast<int>(it - knots.begin()) - 1;
    return k + (y - knots[k]) / (knots[k + 1] - knots[k]);
}

BinaryGrid rasterize_binary(const Ink& ink, int n) {
    if (n < 1) throw InvalidArgument("raster size must be positive");
    BinaryGrid grid{n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 0)};
    const auto cell = [n](Point p) { return GridPoint{unit_to_cell(p.x, n), unit_to_cell(p.y, n)}; };
    for (const Stroke& s : ink.strokes()) {
        if (!s.is_real()) continue;
        const auto& pts = s.points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const GridPoint a = cell(pts[i]);
            const GridPoint b = i + 1 < pts.size() ? cell(pts[i + 1]) : a;
            for (GridPoint g : bresenham_cells(a, b, n, n))
                grid.cells[static_cast<std::size_t>(g.y) * n + g.x] = 1;
        }
    }
    return grid;
}

std::pair<DensityProjection, DensityProjection> density_projections(const BinaryGrid& grid) {
    const int n = grid.n;
    DensityProjection dx{Axis::x, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    DensityProjection dy{Axis::y, std::vector<double>(static_cast<std::size_t>(n), 0.0)};

    // Walks one line of the grid and adds every cell's density to proj at
    // the cell's position along the line.
    const auto scan = [n](auto&& is_stroke, std::vector<double>& proj) {
        int i = 0;
        while (i < n) {
            if (is_stroke(i)) {
                proj[i] += 1.0;
                ++i;
                continue;
            }
            int j = i;
            while (j < n && !is_stroke(j)) ++j;
            const double density = 1.0 / static_cast<double>(std::min(j - i, n));
            for (int k = i; k < j; ++k) proj[k] += density;
            i = j;
        }
    };
    for (int y = 0; y < n; ++y) scan([&](int x) { return grid.at(x, y); }, dx.values);
    for (int x = 0; x < n; ++x) scan([&](int y) { return grid.at(x, y); }, dy.values);

    for (DensityProjection* d : {&dx, &dy}) {
        const double mean = std::accumulate(d->values.begin(), d->values.end(), 0.0) / n;
        const double floor = 0.05 * mean;
        for (double& v : d->values) v = std::max(v, floor);
    }
    return {std::move(dx), std::move(dy)};
}

double cumulative_density(const DensityProjection& d, double x) noexcept {
    const int n = static_cast<int>(d.values.size());
    if (!(x > 0.0)) return 0.0;
    const double clamped = std::min(x, static_cast<double>(n));
    const int k = std::min(static_cast<int>(std::floor(clamped)), n);
    double p = 0.0;
    for (int j = 0; j < k; ++j) p += d.values[j];
    if (k < n) p += (clamped - k) * d.values[k];
    return p;
}

CoordinateMap build_map(const DensityProjection& d) {
    const int n = static_cast<int>(d.values.size());
    if (n < 1) throw InvalidArgument("empty density projection");
    for (double v : d.values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("density must be positive and finite");
    }
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + d.values[k];
    const double total = prefix[n];

    CoordinateMap map{d.axis, std::vector<double>(static_cast<std::size_t>(n) + 1)};
    for (int k = 0; k <= n; ++k) map.knots[k] = n * prefix[k] / total;
    map.knots.front() = 0.0;
    map.knots.back() = n;
    return map;
}

std::pair<CoordinateMap, CoordinateMap> nln_maps(const Ink& ink, int n) {
    const auto [dx, dy] = density_projections(rasterize_binary(ink, n));
    return {build_map(dx), build_map(dy)};
}

Ink apply_nln(const Ink& ink, int n) {
    const auto [mx, my] = nln_maps(ink, n);
    const double scale = static_cast<double>(n);
    return transform_points(ink, [&](Point p) {
        const double x = std::clamp(p.x, 0.0, 1.0);
        const double y = std::clamp(p.y, 0.0, 1.0);
        return Point{mx(scale * x) / scale, my(scale * y) / scale};
    });
}

} // namespace inkdk
