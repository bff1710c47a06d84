#include "inkdk/features.hpp"

#include "inkdk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace inkdk {

Sig2 seg_signature(Point p, Point q) noexcept {
    Sig2 s;
    const Vec2 d{q.x - p.x, q.y - p.y};
    s.level1 = d;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s.level2[i][j] = d[i] * d[j] / 2.0;
    return s;
}

Sig2 chen_concat(const Sig2& a, const Sig2& b) noexcept {
    Sig2 s;
    s.level0 = a.level0 * b.level0;
    for (int i = 0; i < 2; ++i) {
        s.level1[i] = a.level1[i] + b.level1[i];
        for (int j = 0; j < 2; ++j)
            s.level2[i][j] = a.level2[i][j] + b.level2[i][j] + a.level1[i] * b.level1[j];
    }
    return s;
}

Sig2 path_signature(std::span<const Point> points) noexcept {
    Sig2 s;
    for (std::size_t k = 1; k < points.size(); ++k)
        s = chen_concat(s, seg_signature(points[k - 1], points[k]));
    return s;
}

Sig2 window_signature(std::span<const Point> points, std::size_t i, int radius) {
    if (i >= points.size()) throw IndexOutOfRange("window centre outside stroke");
    if (radius < 1) throw InvalidArgument("window radius must be at least 1");
    const std::size_t r = static_cast<std::size_t>(radius);
    const std::size_t lo = i >= r ? i - r : 0;
    const std::size_t hi = std::min(points.size() - 1, i + r);
    return path_signature(points.subspan(lo, hi - lo + 1));
}

Vec2 direction_at(std::span<const Point> points, std::size_t i) {
    if (points.size() < 2) throw TooShort("direction needs at least two points");
    if (i >= points.size()) throw IndexOutOfRange("direction index outside stroke");
    const std::size_t last = points.size() - 1;
    for (std::size_t w = 1; w <= last; ++w) {
        const std::size_t a = i >= w ? i - w : 0;
        const std::size_t b = std::min(last, i + w);
        const double dx = points[b].x - points[a].x;
        const double dy = points[b].y - points[a].y;
        const double len = std::hypot(dx, dy);
        if (len > 0.0) return {dx / len, dy / len};
        if (a == 0 && b == last) break;
    }
    return {1.0, 0.0};
}

Vec2 direction_axis(int k) noexcept {
    constexpr double r = std::numbers::sqrt2 / 2.0;
    static constexpr std::array<Vec2, 8> axes{
        Vec2{1.0, 0.0}, Vec2{r, r},   Vec2{0.0, 1.0},  Vec2{-r, r},
        Vec2{-1.0, 0.0}, Vec2{-r, -r}, Vec2{0.0, -1.0}, Vec2{r, -r}};
    return axes[static_cast<std::size_t>(((k % 8) + 8) % 8)];
}

std::array<double, 8> decompose8(Vec2 u) {
    const double norm = std::hypot(u[0], u[1]);
    if (!(std::abs(norm - 1.0) <= 1e-9)) throw NotUnit("direction vector is not unit length");

    double angle = std::atan2(u[1], u[0]);
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    int k = static_cast<int>(std::floor(angle / (std::numbers::pi / 4.0)));
    k = std::clamp(k, 0, 7);

    const Vec2 ek = direction_axis(k);
    const Vec2 ek1 = direction_axis(k + 1);
    const auto cross = [](Vec2 a, Vec2 b) { return a[0] * b[1] - a[1] * b[0]; };
    const double det = cross(ek, ek1);
    double a = cross(u, ek1) / det;
    double b = cross(ek, u) / det;
    // atan2 rounding can put u a hair outside the sector; vectors on an axis
    // must land entirely on that axis.
    constexpr double snap = 1e-15;
    if (a <= snap) {
        a = 0.0;
        b = u[0] * ek1[0] + u[1] * ek1[1];
    }
    if (b <= snap) {
        b = 0.0;
        a = u[0] * ek[0] + u[1] * ek[1];
    }

    std::array<double, 8> out{};
    out[static_cast<std::size_t>(k)] = a;
    out[static_cast<std::size_t>((k + 1) % 8)] = b;
    return out;
}

int FeatureConfig::block_width() const noexcept {
    int w = 1;
    if (sig_level >= 1) w += 2;
    if (sig_level >= 2) w += 4;
    if (use_dir8) w += 8;
    return w;
}

int FeatureConfig::channels() const noexcept { return block_width() * (use_imaginary ? 2 : 1); }

std::vector<std::string> FeatureConfig::channel_labels() const {
    std::vector<std::string> block{"sig0"};
    if (sig_level >= 1) {
        block.insert(block.end(), {"sig1x", "sig1y"});
    }
    if (sig_level >= 2) {
        block.insert(block.end(), {"sig2xx", "sig2xy", "sig2yx", "sig2yy"});
    }
    if (use_dir8) {
        for (int k = 0; k < 8; ++k) block.push_back("dir" + std::to_string(k));
    }
    std::vector<std::string> labels = block;
    if (use_imaginary) {
        for (const std::string& l : block) labels.push_back(l + "-im");
    }
    return labels;
}

void FeatureConfig::validate() const {
    if (sig_level < 0 || sig_level > 2) throw ConfigError("sig_level must be 0, 1 or 2");
    if (window_radius < 1) throw ConfigError("window_radius must be at least 1");
}

std::vector<StrokeFeatures> point_features(const Ink& ink, const FeatureConfig& config) {
    config.validate();
    std::vector<StrokeFeatures> out;
    out.reserve(ink.strokes().size());
    for (const Stroke& s : ink.strokes()) {
        StrokeFeatures sf;
        sf.kind = s.kind();
        if (s.is_real() || config.use_imaginary) {
            const std::span<const Point> pts(s.points());
            sf.points.resize(pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i) {
                PointFeatures& f = sf.points[i];
                if (config.sig_level >= 1) f.sig = window_signature(pts, i, config.window_radius);
                if (config.use_dir8 && pts.size() >= 2) f.dir8 = decompose8(direction_at(pts, i));
            }
        }
        out.push_back(std::move(sf));
    }
    return out;
}

void flatten_features(const PointFeatures& f, const FeatureConfig& config, std::span<double> out) {
    if (out.size() != static_cast<std::size_t>(config.block_width()))
        throw DimensionMismatch("feature buffer does not match block width");
    std::size_t c = 0;
    out[c++] = f.sig.level0;
    if (config.sig_level >= 1) {
        out[c++] = f.sig.level1[0];
        out[c++] = f.sig.level1[1];
    }
    if (config.sig_level >= 2) {
        out[c++] = f.sig.level2[0][0];
        out[c++] = f.sig.level2[0][1];
        out[c++] = f.sig.level2[1][0];
        out[c++] = f.sig.level2[1][1];
    }
    if (config.use_dir8) {
        for (double v : f.dir8) out[c++] = v;
    }
}

} // namespace inkdk
