#pragma once

#include "inkdk/ink.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace inkdk {

enum class Axis { x, y };

/// n x n binary raster, row-major (cells[y * n + x]).
struct BinaryGrid {
    int n = 0;
    std::vector<std::uint8_t> cells;

    bool at(int x, int y) const noexcept { return cells[static_cast<std::size_t>(y) * n + x] != 0; }
};

struct DensityProjection {
    Axis axis = Axis::x;
    std::vector<double> values;
};

/// Piecewise-linear remap of [0, n]; knots[k] is the image of grid line k.
struct CoordinateMap {
    Axis axis = Axis::x;
    std::vector<double> knots;

    int n() const noexcept { return static_cast<int>(knots.size()) - 1; }
    /// Image of a continuous coordinate in [0, n] (clamped).
    double operator()(double x) const noexcept;
    /// Preimage of a remapped coordinate in [0, n] (clamped).
    double inverse(double y) const noexcept;
};

/// Cells crossed by real-stroke segments of a unit-box ink.
BinaryGrid rasterize_binary(const Ink& ink, int n);

/// Line-density projections (dx over columns, dy over rows).
///
/// Stroke cells have density 1; a background cell has 1/L where L is the
/// length of the background run through it along the projected axis. Each
/// projected value is floored at 5% of the mean projection.
std::pair<DensityProjection, DensityProjection> density_projections(const BinaryGrid& grid);

/// Equalizing map: x' = n * P(x) / P(n) with P the piecewise-linear
/// cumulative density. Strictly increasing, fixes 0 and n.
CoordinateMap build_map(const DensityProjection& d);

/// Both axis maps of an ink rasterized on an n-cell grid.
std::pair<CoordinateMap, CoordinateMap> nln_maps(const Ink& ink, int n);

/// Line-density equalizing normalization of a unit-box ink.
Ink apply_nln(const Ink& ink, int n = 64);

/// Piecewise-linear cumulative density P at a continuous coordinate in [0, n].
double cumulative_density(const DensityProjection& d, double x) noexcept;

} // namespace inkdk
