#include "inkdk/pipeline.hpp"

#include "inkdk/error.hpp"
#include "inkdk/nln.hpp"

#include <nlohmann/json.hpp>

namespace inkdk {

using nlohmann::json;

double PipelineConfig::effective_spacing() const noexcept {
    return spacing > 0.0 ? spacing : 1.0 / static_cast<double>(render.inner);
}

void PipelineConfig::validate() const {
    features.validate();
    render.validate();
    try {
        deformation.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (nln_grid < 4) throw ConfigError("nln grid must be at least 4");
    if (!(spacing >= 0.0)) throw ConfigError("spacing must be non-negative");
}

PipelineConfig preset(char name) {
    PipelineConfig c;
    c.features.sig_level = 2;
    switch (name) {
    case 'A': c.features.sig_level = 0; break;
    case 'B': c.features.sig_level = 1; break;
    case 'C': break;
    case 'D':
        c.deformation.use_dt = true;
        c.deformation.use_leung = true;
        break;
    case 'E': c.nln = true; break;
    case 'F': c.features.use_dir8 = true; break;
    case 'G': c.features.use_imaginary = true; break;
    case 'H':
        c.deformation.use_dt = true;
        c.deformation.use_leung = true;
        c.features.use_dir8 = true;
        c.features.use_imaginary = true;
        break;
    default: throw ConfigError(std::string("unknown preset '") + name + "' (expected A-H)");
    }
    return c;
}

namespace {

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

void read_range(const json& j, const char* key, Range& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(std::string("\"") + key + "\" must be a [lo, hi] pair");
    out = {v[0].get<double>(), v[1].get<double>()};
}

const json* block(const json& j, const char* key) {
    if (!j.contains(key)) return nullptr;
    if (!j.at(key).is_object()) throw ConfigError(std::string("\"") + key + "\" must be an object");
    return &j.at(key);
}

} // namespace

json to_json(const PipelineConfig& c) {
    const AffineJitterParams& a = c.deformation.affine;
    return {
        {"features",
         {{"sig_level", c.features.sig_level},
          {"dir8", c.features.use_dir8},
          {"imaginary", c.features.use_imaginary},
          {"window_radius", c.features.window_radius}}},
        {"raster",
         {{"inner", c.render.inner},
          {"outer", c.render.outer},
          {"overlap", c.render.overlap == OverlapMode::max ? "max" : "overwrite"}}},
        {"nln", {{"enabled", c.nln}, {"grid", c.nln_grid}, {"before_deformation", c.nln_before_deformation}}},
        {"augment",
         {{"dt", c.deformation.use_dt},
          {"leung", c.deformation.use_leung},
          {"affine",
           {{"scale", range_json(a.scale)},
            {"rotate", a.rotate},
            {"translate", a.translate},
            {"stretch", range_json(a.stretch)}}},
          {"warp_alpha", c.deformation.warp_alpha},
          {"shear", c.deformation.shear},
          {"resize_factor", range_json(c.deformation.resize_factor)},
          {"resize_radius", range_json(c.deformation.resize_radius)},
          {"resize_center", range_json(c.deformation.resize_center)}}},
        {"spacing", c.spacing},
    };
}

PipelineConfig pipeline_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("pipeline configuration must be an object");
    PipelineConfig c;
    if (j.contains("preset")) {
        const json& p = j.at("preset");
        if (!p.is_string() || p.get<std::string>().size() != 1) throw ConfigError("\"preset\" must be one letter");
        c = preset(p.get<std::string>()[0]);
    }
    if (const json* f = block(j, "features")) {
        read(*f, "sig_level", c.features.sig_level);
        read(*f, "dir8", c.features.use_dir8);
        read(*f, "imaginary", c.features.use_imaginary);
        read(*f, "window_radius", c.features.window_radius);
    }
    if (const json* r = block(j, "raster")) {
        read(*r, "inner", c.render.inner);
        read(*r, "outer", c.render.outer);
        std::string overlap = c.render.overlap == OverlapMode::max ? "max" : "overwrite";
        read(*r, "overlap", overlap);
        if (overlap == "max") {
            c.render.overlap = OverlapMode::max;
        } else if (overlap == "overwrite") {
            c.render.overlap = OverlapMode::overwrite;
        } else {
            throw ConfigError("raster.overlap must be \"max\" or \"overwrite\"");
        }
    }
    if (const json* n = block(j, "nln")) {
        read(*n, "enabled", c.nln);
        read(*n, "grid", c.nln_grid);
        read(*n, "before_deformation", c.nln_before_deformation);
    }
    if (const json* a = block(j, "augment")) {
        read(*a, "dt", c.deformation.use_dt);
        read(*a, "leung", c.deformation.use_leung);
        if (const json* af = block(*a, "affine")) {
            read_range(*af, "scale", c.deformation.affine.scale);
            read(*af, "rotate", c.deformation.affine.rotate);
            read(*af, "translate", c.deformation.affine.translate);
            read_range(*af, "stretch", c.deformation.affine.stretch);
        }
        read(*a, "warp_alpha", c.deformation.warp_alpha);
        read(*a, "shear", c.deformation.shear);
        read_range(*a, "resize_factor", c.deformation.resize_factor);
        read_range(*a, "resize_radius", c.deformation.resize_radius);
        read_range(*a, "resize_center", c.deformation.resize_center);
    }
    read(j, "spacing", c.spacing);
    c.validate();
    return c;
}

std::vector<float> channel_scales(const PipelineConfig& config) {
    const double reach = 2.0 * config.features.window_radius * config.effective_spacing();
    std::vector<float> scales;
    for (const std::string& label : config.features.channel_labels()) {
        if (label.starts_with("sig1")) {
            scales.push_back(static_cast<float>(1.0 / reach));
        } else if (label.starts_with("sig2")) {
            scales.push_back(static_cast<float>(2.0 / (reach * reach)));
        } else {
            scales.push_back(1.0f);
        }
    }
    return scales;
}

Ink prepare_ink(const Ink& ink, const PipelineConfig& config, std::optional<std::uint64_t> deform_seed) {
    Ink out = normalize_to_box(ink);
    if (config.nln && (config.nln_before_deformation || !deform_seed)) out = apply_nln(out, config.nln_grid);
    if (deform_seed) {
        out = sample_deformation(config.deformation, *deform_seed).apply(out);
        if (config.nln && !config.nln_before_deformation) out = apply_nln(out, config.nln_grid);
    }
    if (config.features.use_imaginary) out = add_imaginary_strokes(out);
    return resample_equidistant(out, config.effective_spacing());
}

FeatureTensor featurize_prepared(const Ink& prepared, const PipelineConfig& config) {
    FeatureTensor t = render(prepared, point_features(prepared, config.features), config.features, config.render);
    t.set_scales(channel_scales(config));
    return t;
}

FeatureTensor featurize(const Ink& ink, const PipelineConfig& config, std::optional<std::uint64_t> deform_seed) {
    return featurize_prepared(prepare_ink(ink, config, deform_seed), config);
}

const Ink& PreparedInkCache::get(const PipelineConfig& config) {
    const Key key{config.nln, config.nln ? config.nln_grid : 0, config.features.use_imaginary,
                  config.effective_spacing()};
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, prepare_ink(ink_, config)).first;
    return it->second;
}

} // namespace inkdk
