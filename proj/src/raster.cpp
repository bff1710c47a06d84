#include "inkdk/raster.hpp"

#include "inkdk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace inkdk {

FeatureTensor::FeatureTensor(int channels, int height, int width, std::vector<std::string> labels)
    : channels_(channels), height_(height), width_(width), labels_(std::move(labels)) {
    if (channels_ < 1) throw FormatError("tensor needs at least one channel");
    if (height_ < 1 || width_ < 1) throw FormatError("tensor needs positive spatial size");
    if (labels_.size() != static_cast<std::size_t>(channels_))
        throw DimensionMismatch("one label per channel required");
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size())
        throw FormatError("channel labels must be distinct");
    scales_.assign(static_cast<std::size_t>(channels_), 1.0f);
    data_.assign(static_cast<std::size_t>(channels_) * plane_size(), 0.0f);
}

void FeatureTensor::set_scales(std::vector<float> scales) {
    if (scales.size() != static_cast<std::size_t>(channels_))
        throw DimensionMismatch("one scale per channel required");
    scales_ = std::move(scales);
}

std::span<float> FeatureTensor::channel(int c) noexcept {
    return std::span<float>(data_).subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
}

std::span<const float> FeatureTensor::channel(int c) const noexcept {
    return std::span<const float>(data_).subspan(static_cast<std::size_t>(c) * plane_size(),
                                                 plane_size());
}

int FeatureTensor::find_channel(const std::string& label) const noexcept {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

void RenderConfig::validate() const {
    if (inner < 8 || outer < 8) throw ConfigError("render sizes must be at least 8");
    if (inner > outer) throw ConfigError("inner render size exceeds outer size");
}

std::vector<GridPoint> bresenham_cells(GridPoint p, GridPoint q, int width, int height) {
    const auto inside = [&](GridPoint g) { return g.x >= 0 && g.y >= 0 && g.x < width && g.y < height; };
    if (!inside(p) || !inside(q)) throw OutOfGrid("line endpoint outside grid");

    std::vector<GridPoint> cells;
    const int dx = std::abs(q.x - p.x);
    const int dy = -std::abs(q.y - p.y);
    const int sx = p.x < q.x ? 1 : -1;
    const int sy = p.y < q.y ? 1 : -1;
    cells.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
    int err = dx + dy;
    GridPoint c = p;
    while (true) {
        cells.push_back(c);
        if (c == q) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            c.x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            c.y += sy;
        }
    }
    return cells;
}

int unit_to_cell(double t, int n) noexcept {
    const double v = std::floor(t * static_cast<double>(n));
    if (!(v >= 0.0)) return 0;
    return v >= static_cast<double>(n - 1) ? n - 1 : static_cast<int>(v);
}

Canvas::Canvas(FeatureTensor tensor, int block_width, OverlapMode mode)
    : tensor_(std::move(tensor)), block_width_(block_width), mode_(mode) {
    if (block_width_ < 1 || tensor_.channels() % block_width_ != 0)
        throw DimensionMismatch("channel count is not a multiple of the block width");
    covered_.assign(static_cast<std::size_t>(tensor_.channels() / block_width_) * tensor_.plane_size(), 0);
}

void Canvas::write(int block, GridPoint cell, std::span<const double> values) {
    const std::size_t pix = static_cast<std::size_t>(cell.y) * tensor_.width() + cell.x;
    std::uint8_t& seen = covered_[static_cast<std::size_t>(block) * tensor_.plane_size() + pix];
    const int c0 = block * block_width_;
    for (int k = 0; k < block_width_; ++k) {
        float& dst = tensor_.at(c0 + k, cell.y, cell.x);
        const float v = static_cast<float>(values[static_cast<std::size_t>(k)]);
        dst = (seen != 0 && mode_ == OverlapMode::max) ? std::max(dst, v) : v;
    }
    seen = 1;
}

void Canvas::splat_segment(GridPoint p, GridPoint q, std::span<const double> fp,
                           std::span<const double> fq, int block) {
    const std::size_t w = static_cast<std::size_t>(block_width_);
    if (fp.size() != w || fq.size() != w)
        throw DimensionMismatch("feature vector length does not match channel block");
    if (block < 0 || (block + 1) * block_width_ > tensor_.channels())
        throw DimensionMismatch("channel block out of range");

    const std::vector<GridPoint> cells = bresenham_cells(p, q, tensor_.width(), tensor_.height());
    std::vector<double> v(w);
    const std::size_t last = cells.size() - 1;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double t = last == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(last);
        for (std::size_t k = 0; k < w; ++k) v[k] = fp[k] + t * (fq[k] - fp[k]);
        write(block, cells[i], v);
    }
}

FeatureTensor render(const Ink& ink, const std::vector<StrokeFeatures>& features,
                     const FeatureConfig& fc, const RenderConfig& rc) {
    fc.validate();
    rc.validate();
    if (features.size() != ink.strokes().size())
        throw DimensionMismatch("features are not aligned with ink strokes");

    const int width = fc.block_width();
    Canvas canvas(FeatureTensor(fc.channels(), rc.outer, rc.outer, fc.channel_labels()), width,
                  rc.overlap);
    const int offset = (rc.outer - rc.inner) / 2;
    const auto to_grid = [&](Point p) {
        return GridPoint{offset + unit_to_cell(p.x, rc.inner), offset + unit_to_cell(p.y, rc.inner)};
    };

    std::vector<double> fa(static_cast<std::size_t>(width));
    std::vector<double> fb(static_cast<std::size_t>(width));
    for (std::size_t s = 0; s < features.size(); ++s) {
        const Stroke& stroke = ink.strokes()[s];
        const StrokeFeatures& sf = features[s];
        if (!stroke.is_real() && !fc.use_imaginary) continue;
        if (sf.points.size() != stroke.size())
            throw DimensionMismatch("features are not aligned with stroke points");
        const int block = stroke.is_real() ? 0 : 1;
        const auto& pts = stroke.points();

        flatten_features(sf.points[0], fc, fa);
        if (pts.size() == 1) {
            const GridPoint g = to_grid(pts[0]);
            canvas.splat_segment(g, g, fa, fa, block);
            continue;
        }
        for (std::size_t i = 1; i < pts.size(); ++i) {
            flatten_features(sf.points[i], fc, fb);
            canvas.splat_segment(to_grid(pts[i - 1]), to_grid(pts[i]), fa, fb, block);
            std::swap(fa, fb);
        }
    }
    return std::move(canvas).release();
}

} // namespace inkdk
