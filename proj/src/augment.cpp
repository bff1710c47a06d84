#include "inkdk/augment.hpp"

#include "inkdk/error.hpp"
#include "inkdk/rng.hpp"

#include <cmath>
#include <string>

namespace inkdk {

namespace {

void check_range(const Range& r, const char* what) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw InvalidArgument(std::string(what) + " range must satisfy lo <= hi");
}

bool inside_unit_box(const Ink& ink) {
    const Rect box = bounding_box(ink);
    constexpr double tol = 1e-12;
    return box.min_x >= -tol && box.min_y >= -tol && box.max_x <= 1.0 + tol && box.max_y <= 1.0 + tol;
}

} // namespace

void AffineJitterParams::validate() const {
    check_range(scale, "scale");
    check_range(stretch, "stretch");
    if (!(rotate >= 0.0) || !(translate >= 0.0))
        throw InvalidArgument("rotate and translate bounds must be non-negative");
    if (scale.lo <= 0.0 || stretch.lo <= 0.0) throw InvalidArgument("scale factors must be positive");
}

void LeungParams::validate() const {
    if (!(resize_factor >= 0.5 && resize_factor <= 2.0))
        throw InvalidArgument("resize_factor must lie in [0.5, 2]");
    if (!(resize_radius > 0.0 && resize_radius <= 1.0))
        throw InvalidArgument("resize_radius must lie in (0, 1]");
    if (!std::isfinite(shear)) throw InvalidArgument("shear must be finite");
}

void DeformationPolicy::validate() const {
    affine.validate();
    if (!(warp_alpha >= 0.0 && warp_alpha <= 1.0)) throw InvalidArgument("warp_alpha must lie in [0, 1]");
    if (!(shear >= 0.0)) throw InvalidArgument("shear bound must be non-negative");
    check_range(resize_factor, "resize_factor");
    check_range(resize_radius, "resize_radius");
    check_range(resize_center, "resize_center");
    if (resize_factor.lo < 0.5 || resize_factor.hi > 2.0)
        throw InvalidArgument("resize_factor range must lie in [0.5, 2]");
    if (resize_radius.lo <= 0.0 || resize_radius.hi > 1.0)
        throw InvalidArgument("resize_radius range must lie in (0, 1]");
}

AffineDraw draw_affine(const AffineJitterParams& params, std::uint64_t seed) {
    params.validate();
    Rng rng(seed);
    AffineDraw d;
    d.scale = uniform(rng, params.scale.lo, params.scale.hi);
    d.rotate = uniform(rng, -params.rotate, params.rotate);
    d.tx = uniform(rng, -params.translate, params.translate);
    d.ty = uniform(rng, -params.translate, params.translate);
    d.sx = uniform(rng, params.stretch.lo, params.stretch.hi);
    d.sy = uniform(rng, params.stretch.lo, params.stretch.hi);
    return d;
}

Ink apply_affine(const Ink& ink, const AffineDraw& d) {
    if (d == AffineDraw{}) return ink;
    const double c = std::cos(d.rotate);
    const double sn = std::sin(d.rotate);
    Ink out = transform_points(ink, [&](Point p) {
        const double x = (p.x - 0.5) * d.sx * d.scale;
        const double y = (p.y - 0.5) * d.sy * d.scale;
        return Point{0.5 + c * x - sn * y + d.tx, 0.5 + sn * x + c * y + d.ty};
    });
    if (!inside_unit_box(out)) out = normalize_to_box(out);
    return out;
}

Ink affine_jitter(const Ink& ink, const AffineJitterParams& params, std::uint64_t seed) {
    return apply_affine(ink, draw_affine(params, seed));
}

Ink warp_1d(const Ink& ink, const WarpParams& params) {
    if (std::abs(params.alpha_x) > 1.0 || std::abs(params.alpha_y) > 1.0)
        throw InvalidAlpha("warp alpha must lie in [-1, 1]");
    const auto w = [](double t, double a) { return t + a * t * (1.0 - t); };
    return transform_points(ink, [&](Point p) { return Point{w(p.x, params.alpha_x), w(p.y, params.alpha_y)}; });
}

Ink distort_leung(const Ink& ink, const LeungParams& params) {
    params.validate();
    const Point c = params.resize_center;
    const double radius = params.resize_radius;
    const double factor = params.resize_factor;
    const Ink out = transform_points(ink, [&](Point p) {
        Point q{p.x + params.shear * (p.y - 0.5), p.y};
        const double d = std::hypot(q.x - c.x, q.y - c.y);
        if (d < radius) {
            const double f = factor + (1.0 - factor) * (d / radius);
            q = {c.x + f * (q.x - c.x), c.y + f * (q.y - c.y)};
        }
        return q;
    });
    return normalize_to_box(out);
}

Ink Deformation::apply(const Ink& ink) const {
    Ink out = ink;
    if (warp) out = warp_1d(out, *warp);
    if (leung) out = distort_leung(out, *leung);
    return affine_jitter(out, affine, affine_seed);
}

Deformation sample_deformation(const DeformationPolicy& policy, std::uint64_t seed) {
    policy.validate();
    Rng rng(seed);
    Deformation d;
    d.affine = policy.affine;
    // Every parameter is drawn whatever the flags say: a seed maps to the
    // same draws under any policy.
    const bool warp_coin = uniform(rng, 0.0, 1.0) < 0.5;
    const WarpParams warp{uniform(rng, -policy.warp_alpha, policy.warp_alpha),
                          uniform(rng, -policy.warp_alpha, policy.warp_alpha)};
    const bool leung_coin = uniform(rng, 0.0, 1.0) < 0.5;
    LeungParams leung;
    leung.shear = uniform(rng, -policy.shear, policy.shear);
    leung.resize_center = {uniform(rng, policy.resize_center.lo, policy.resize_center.hi),
                           uniform(rng, policy.resize_center.lo, policy.resize_center.hi)};
    leung.resize_factor = uniform(rng, policy.resize_factor.lo, policy.resize_factor.hi);
    leung.resize_radius = uniform(rng, policy.resize_radius.lo, policy.resize_radius.hi);
    d.affine_seed = rng();

    if (policy.use_dt && warp_coin) d.warp = warp;
    if (policy.use_leung && leung_coin) d.leung = leung;
    return d;
}

} // namespace inkdk
