#pragma once

#include "inkdk/features.hpp"
#include "inkdk/ink.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace inkdk {

/// Dense C x H x W grid of features, row-major within each channel.
///
/// `scales` holds one multiplier per channel that standardizes the raw
/// values for the network; the raw data itself is never rescaled.
class FeatureTensor {
public:
    FeatureTensor() = default;
    FeatureTensor(int channels, int height, int width, std::vector<std::string> labels);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<float>& scales() const noexcept { return scales_; }
    void set_scales(std::vector<float> scales);

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> channel(int c) noexcept;
    std::span<const float> channel(int c) const noexcept;

    float& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }
    float at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }

    /// Index of the labelled channel, or -1.
    int find_channel(const std::string& label) const noexcept;

    friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

private:
    std::size_t index(int c, int y, int x) const noexcept {
        return (static_cast<std::size_t>(c) * height_ + static_cast<std::size_t>(y)) * width_ +
               static_cast<std::size_t>(x);
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<std::string> labels_;
    std::vector<float> scales_;
    std::vector<float> data_;
};

enum class OverlapMode { max, overwrite };

struct RenderConfig {
    int inner = 24;
    int outer = 48;
    OverlapMode overlap = OverlapMode::max;

    /// Throws ConfigError unless 8 <= inner <= outer.
    void validate() const;

    friend bool operator==(const RenderConfig&, const RenderConfig&) = default;
};

struct GridPoint {
    int x = 0;
    int y = 0;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// 8-connected line cells from p to q inclusive. Throws OutOfGrid when an
/// endpoint lies outside a width x height grid.
std::vector<GridPoint> bresenham_cells(GridPoint p, GridPoint q, int width, int height);

/// Cell of a unit coordinate t on an n-cell axis: floor(t * n) clamped.
int unit_to_cell(double t, int n) noexcept;

/// Splatting target: a tensor plus a coverage mask per channel block, so the
/// first write to a cell stores its value (negative ones included) and later
/// writes to that cell are collisions resolved by the overlap mode.
class Canvas {
public:
    Canvas(FeatureTensor tensor, int block_width, OverlapMode mode);

    /// Interpolates fp -> fq along bresenham_cells(p, q) into the block whose
    /// first channel is block * block_width. Throws DimensionMismatch when
    /// the vectors do not have block_width entries.
    void splat_segment(GridPoint p, GridPoint q, std::span<const double> fp,
                       std::span<const double> fq, int block = 0);

    const FeatureTensor& tensor() const noexcept { return tensor_; }
    FeatureTensor release() && { return std::move(tensor_); }

private:
    void write(int block, GridPoint cell, std::span<const double> values);

    FeatureTensor tensor_;
    int block_width_;
    OverlapMode mode_;
    std::vector<std::uint8_t> covered_;
};

/// Renders per-point features onto an outer x outer grid with the unit box
/// mapped onto the centred inner x inner window. Real strokes fill the
/// first channel block, imaginary strokes (when configured) the second.
FeatureTensor render(const Ink& ink, const std::vector<StrokeFeatures>& features,
                     const FeatureConfig& fc, const RenderConfig& rc);

} // namespace inkdk
