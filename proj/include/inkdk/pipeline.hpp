#pragma once

#include "inkdk/augment.hpp"
#include "inkdk/features.hpp"
#include "inkdk/ink.hpp"
#include "inkdk/raster.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>

namespace inkdk {

/// Everything that turns an ink into a network input.
///
/// Order: unit-box normalization, deformation (training only), NLN,
/// imaginary strokes, equidistant resampling, per-point features, render.
/// With nln_before_deformation the NLN step moves ahead of the deformation.
struct PipelineConfig {
    FeatureConfig features;
    RenderConfig render;
    DeformationPolicy deformation;
    bool nln = false;
    int nln_grid = 64;
    bool nln_before_deformation = false;
    /// Resampling step in unit-box units; 0 selects 1 / render.inner.
    double spacing = 0.0;

    double effective_spacing() const noexcept;
    int channels() const noexcept { return features.channels(); }
    /// Throws ConfigError on any invalid field.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Presets: A Sign0, B +Sign1, C +Sign2, D C+DT, E C+NLN, F C+8Dir,
/// G C+IS, H C+DT+8Dir+IS. Throws ConfigError for other letters.
PipelineConfig preset(char name);

nlohmann::json to_json(const PipelineConfig& config);
/// Fields missing from j keep their defaults (or the preset named by j's
/// "preset" key). Throws ConfigError on malformed values.
PipelineConfig pipeline_from_json(const nlohmann::json& j);

/// Per-channel multipliers that bring raw features to unit order: 1 for the
/// bitmap and direction channels, 1/(2 r s) for level-1 and 2/(2 r s)^2 for
/// level-2 signature channels (window radius r, spacing s).
std::vector<float> channel_scales(const PipelineConfig& config);

/// Unit-box ink after deformation, NLN, imaginary strokes and resampling.
Ink prepare_ink(const Ink& ink, const PipelineConfig& config, std::optional<std::uint64_t> deform_seed = std::nullopt);

/// Features and render of an already prepared ink.
FeatureTensor featurize_prepared(const Ink& prepared, const PipelineConfig& config);

/// Full pipeline. A deform_seed enables training-time deformation.
FeatureTensor featurize(const Ink& ink, const PipelineConfig& config,
                        std::optional<std::uint64_t> deform_seed = std::nullopt);

/// Shares normalization, NLN and resampling between pipelines that agree
/// on them. Holds one sample; not for training-time (deformed) inputs.
class PreparedInkCache {
public:
    explicit PreparedInkCache(const Ink& ink) : ink_(ink) {}

    const Ink& get(const PipelineConfig& config);

private:
    using Key = std::tuple<bool, int, bool, double>;
    const Ink& ink_;
    std::map<Key, Ink> cache_;
};

} // namespace inkdk
