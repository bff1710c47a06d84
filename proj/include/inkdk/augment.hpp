#pragma once

#include "inkdk/ink.hpp"

#include <cstdint>
#include <optional>

namespace inkdk {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Range&, const Range&) = default;
};

/// Ranges of the basic elastic-distortion mix. Defaults are moderate
/// handwriting-augmentation values; identity() disables every component.
struct AffineJitterParams {
    Range scale{0.85, 1.15};
    double rotate = 0.13;     // radians, drawn from [-rotate, rotate]
    double translate = 0.05;  // unit-box units, per axis
    Range stretch{0.85, 1.15};

    static AffineJitterParams identity() noexcept { return {{1.0, 1.0}, 0.0, 0.0, {1.0, 1.0}}; }
    void validate() const;

    friend bool operator==(const AffineJitterParams&, const AffineJitterParams&) = default;
};

/// Quadratic 1-D warp w(t) = t + alpha * t * (1 - t) per axis.
struct WarpParams {
    double alpha_x = 0.0;
    double alpha_y = 0.0;

    friend bool operator==(const WarpParams&, const WarpParams&) = default;
};

/// Shear along x followed by a radial resize around a centre that blends
/// linearly from resize_factor at the centre to 1 at resize_radius.
struct LeungParams {
    double shear = 0.0;
    Point resize_center{0.5, 0.5};
    double resize_factor = 1.0;
    double resize_radius = 0.5;

    void validate() const;

    friend bool operator==(const LeungParams&, const LeungParams&) = default;
};

/// One concrete affine mix: stretch and scale, rotate, then translate, all
/// about (0.5, 0.5).
struct AffineDraw {
    double scale = 1.0;
    double rotate = 0.0;
    double tx = 0.0;
    double ty = 0.0;
    double sx = 1.0;
    double sy = 1.0;

    friend bool operator==(const AffineDraw&, const AffineDraw&) = default;
};

/// Draw order: scale, rotation, tx, ty, sx, sy.
AffineDraw draw_affine(const AffineJitterParams& params, std::uint64_t seed);

/// Re-normalizes when any real point leaves [0,1]^2.
Ink apply_affine(const Ink& ink, const AffineDraw& draw);

/// apply_affine(ink, draw_affine(params, seed)).
Ink affine_jitter(const Ink& ink, const AffineJitterParams& params, std::uint64_t seed);

/// Throws InvalidAlpha when |alpha| > 1 (the warp is no longer monotone).
Ink warp_1d(const Ink& ink, const WarpParams& params);

/// Shear, local resize, then re-normalization to [0,1]^2.
Ink distort_leung(const Ink& ink, const LeungParams& params);

/// Deformation sampling policy. The warp and the Leung distortion are each
/// applied with probability 1/2 when enabled.
struct DeformationPolicy {
    bool use_dt = false;
    bool use_leung = false;
    AffineJitterParams affine;
    double warp_alpha = 0.5;
    double shear = 0.25;
    Range resize_factor{0.8, 1.25};
    Range resize_radius{0.3, 0.6};
    Range resize_center{0.25, 0.75};

    void validate() const;

    friend bool operator==(const DeformationPolicy&, const DeformationPolicy&) = default;
};

/// One concrete draw from a DeformationPolicy; applies warp -> Leung -> affine.
struct Deformation {
    std::optional<WarpParams> warp;
    std::optional<LeungParams> leung;
    AffineJitterParams affine = AffineJitterParams::identity();
    std::uint64_t affine_seed = 0;

    Ink apply(const Ink& ink) const;

    friend bool operator==(const Deformation&, const Deformation&) = default;
};

Deformation sample_deformation(const DeformationPolicy& policy, std::uint64_t seed);

} // namespace inkdk
