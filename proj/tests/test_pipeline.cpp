#include "inkdk/dataio.hpp"
#include "inkdk/error.hpp"
#include "inkdk/pipeline.hpp"
#include "inkdk/rng.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace inkdk;

namespace {

Ink sample_ink() {
    return synth_dataset(SynthConfig{3, 2, 0.03, 17}).samples()[1];
}

} // namespace

TEST_CASE("presets set the expected channel counts") {
    CHECK(preset('A').channels() == 1);
    CHECK(preset('B').channels() == 3);
    CHECK(preset('C').channels() == 7);
    CHECK(preset('D').channels() == 7);
    CHECK(preset('E').channels() == 7);
    CHECK(preset('F').channels() == 15);
    CHECK(preset('G').channels() == 14);
    CHECK(preset('H').channels() == 30);
    CHECK(preset('E').nln);
    CHECK(preset('D').deformation.use_dt);
    CHECK_FALSE(preset('C').deformation.use_dt);
    CHECK_THROWS_AS(preset('Z'), ConfigError);
}

TEST_CASE("pipeline JSON round-trips every preset") {
    for (char name : std::string("ABCDEFGH")) {
        const PipelineConfig c = preset(name);
        CHECK(pipeline_from_json(to_json(c)) == c);
    }
    PipelineConfig odd = preset('H');
    odd.render = {16, 32, OverlapMode::overwrite};
    odd.spacing = 0.02;
    odd.nln = true;
    odd.nln_before_deformation = true;
    CHECK(pipeline_from_json(to_json(odd)) == odd);
}

TEST_CASE("pipeline JSON errors are configuration errors") {
    CHECK_THROWS_AS(pipeline_from_json(nlohmann::json{{"preset", "Q"}}), ConfigError);
    CHECK_THROWS_AS(pipeline_from_json(nlohmann::json{{"raster", {{"inner", "big"}}}}), ConfigError);
    CHECK_THROWS_AS(pipeline_from_json(nlohmann::json{{"raster", {{"inner", 48}, {"outer", 24}}}}), ConfigError);
    CHECK_THROWS_AS(pipeline_from_json(nlohmann::json{{"features", 3}}), ConfigError);
}

TEST_CASE("default spacing is one inner cell") {
    PipelineConfig c = preset('C');
    CHECK(c.effective_spacing() == doctest::Approx(1.0 / 24));
    c.spacing = 0.1;
    CHECK(c.effective_spacing() == 0.1);
}

TEST_CASE("channel scales match the labels") {
    const PipelineConfig c = preset('H');
    const auto s = channel_scales(c);
    const auto labels = c.features.channel_labels();
    REQUIRE(s.size() == labels.size());
    const double step = 2.0 * c.features.window_radius * c.effective_spacing();
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (labels[k].starts_with("sig1")) CHECK(s[k] == doctest::Approx(1.0 / step));
        else if (labels[k].starts_with("sig2")) CHECK(s[k] == doctest::Approx(2.0 / (step * step)));
        else CHECK(s[k] == 1.0f);
    }
}

TEST_CASE("featurize produces the rendered shape for every preset") {
    const Ink ink = sample_ink();
    for (char name : std::string("ABCDEFGH")) {
        const PipelineConfig c = preset(name);
        const FeatureTensor t = featurize(ink, c);
        CHECK(t.channels() == c.channels());
        CHECK(t.height() == 48);
        CHECK(t.scales() == channel_scales(c));
    }
}

TEST_CASE("featurize is deterministic with and without deformation") {
    const Ink ink = sample_ink();
    const PipelineConfig c = preset('H');
    CHECK(featurize(ink, c) == featurize(ink, c));
    CHECK(featurize(ink, c, 5) == featurize(ink, c, 5));
    CHECK_FALSE(featurize(ink, c, 5) == featurize(ink, c, 6));
    CHECK(featurize(ink, preset('A'), 9) == featurize(ink, preset('A'), 9));
}

TEST_CASE("prepared ink stays in the unit box") {
    const Ink ink = sample_ink();
    for (char name : std::string("CDEH")) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Rect r = bounding_box(prepare_ink(ink, preset(name), seed));
            CHECK(r.min_x >= -1e-9);
            CHECK(r.min_y >= -1e-9);
            CHECK(r.max_x <= 1.0 + 1e-9);
            CHECK(r.max_y <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("the prepared-ink cache matches direct preparation") {
    const Ink ink = sample_ink();
    PreparedInkCache cache(ink);
    for (char name : std::string("ABCEFGCA")) {
        const PipelineConfig c = preset(name);
        CHECK(featurize_prepared(cache.get(c), c) == featurize(ink, c));
    }
}

TEST_CASE("validation catches bad pipelines") {
    PipelineConfig c = preset('C');
    c.nln_grid = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = preset('C');
    c.spacing = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = preset('C');
    c.features.sig_level = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
