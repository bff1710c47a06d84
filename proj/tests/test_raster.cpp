#include "inkdk/error.hpp"
#include "inkdk/raster.hpp"
#include "inkdk/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace inkdk;

namespace {

FeatureTensor render_with(const Ink& ink, const FeatureConfig& fc, const RenderConfig& rc = {}) {
    return render(ink, point_features(ink, fc), fc, rc);
}

} // namespace

TEST_CASE("Bresenham cells for horizontal, diagonal and degenerate lines") {
    CHECK(bresenham_cells({0, 0}, {3, 0}, 8, 8) == std::vector<GridPoint>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    CHECK(bresenham_cells({2, 5}, {2, 5}, 8, 8) == std::vector<GridPoint>{{2, 5}});
    CHECK(bresenham_cells({0, 0}, {2, 2}, 8, 8) == std::vector<GridPoint>{{0, 0}, {1, 1}, {2, 2}});
    CHECK(bresenham_cells({3, 0}, {0, 0}, 8, 8).front() == GridPoint{3, 0});
}

TEST_CASE("Bresenham lines are 8-connected and inclusive") {
    Rng rng(41);
    for (int k = 0; k < 500; ++k) {
        const GridPoint p{static_cast<int>(rng() % 32), static_cast<int>(rng() % 32)};
        const GridPoint q{static_cast<int>(rng() % 32), static_cast<int>(rng() % 32)};
        const auto cells = bresenham_cells(p, q, 32, 32);
        CHECK(cells.front() == p);
        CHECK(cells.back() == q);
        CHECK(cells.size() == static_cast<std::size_t>(std::max(std::abs(q.x - p.x), std::abs(q.y - p.y)) + 1));
        for (std::size_t i = 1; i < cells.size(); ++i) {
            CHECK(std::abs(cells[i].x - cells[i - 1].x) <= 1);
            CHECK(std::abs(cells[i].y - cells[i - 1].y) <= 1);
        }
    }
}

TEST_CASE("Bresenham rejects endpoints outside the grid") {
    CHECK_THROWS_AS(bresenham_cells({0, 0}, {8, 0}, 8, 8), OutOfGrid);
    CHECK_THROWS_AS(bresenham_cells({-1, 0}, {3, 0}, 8, 8), OutOfGrid);
}

TEST_CASE("unit coordinates map to clamped cells") {
    CHECK(unit_to_cell(0.0, 24) == 0);
    CHECK(unit_to_cell(0.5, 24) == 12);
    CHECK(unit_to_cell(1.0, 24) == 23);
    CHECK(unit_to_cell(-0.2, 24) == 0);
}

TEST_CASE("constant one-hot splat draws the bitmap line") {
    Canvas canvas(FeatureTensor(1, 6, 6, {"sig0"}), 1, OverlapMode::max);
    const std::vector<double> one{1.0};
    canvas.splat_segment({0, 2}, {4, 2}, one, one);
    const FeatureTensor t = std::move(canvas).release();
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) CHECK(t.at(0, y, x) == ((y == 2 && x <= 4) ? 1.0f : 0.0f));
    }
}

TEST_CASE("splat interpolates linearly along the line") {
    Canvas canvas(FeatureTensor(2, 4, 4, {"a", "b"}), 2, OverlapMode::max);
    const std::vector<double> fp{0.0, 1.0};
    const std::vector<double> fq{2.0, 1.0};
    canvas.splat_segment({0, 0}, {2, 0}, fp, fq);
    const FeatureTensor& t = canvas.tensor();
    CHECK(t.at(0, 0, 0) == 0.0f);
    CHECK(t.at(0, 0, 1) == 1.0f);
    CHECK(t.at(0, 0, 2) == 2.0f);
    CHECK(t.at(1, 0, 1) == 1.0f);
}

TEST_CASE("collisions keep the maximum") {
    Canvas canvas(FeatureTensor(1, 5, 5, {"v"}), 1, OverlapMode::max);
    const std::vector<double> one{1.0};
    const std::vector<double> three{3.0};
    canvas.splat_segment({0, 2}, {4, 2}, three, three);
    canvas.splat_segment({2, 0}, {2, 4}, one, one);
    CHECK(canvas.tensor().at(0, 2, 2) == 3.0f);
    CHECK(canvas.tensor().at(0, 0, 2) == 1.0f);
    Canvas other(FeatureTensor(1, 5, 5, {"v"}), 1, OverlapMode::max);
    other.splat_segment({2, 0}, {2, 4}, one, one);
    other.splat_segment({0, 2}, {4, 2}, three, three);
    CHECK(other.tensor().at(0, 2, 2) == 3.0f);
}

TEST_CASE("negative values survive the first write; overwrite keeps the last") {
    Canvas canvas(FeatureTensor(1, 3, 3, {"v"}), 1, OverlapMode::max);
    const std::vector<double> neg{-0.5};
    canvas.splat_segment({1, 1}, {1, 1}, neg, neg);
    CHECK(canvas.tensor().at(0, 1, 1) == -0.5f);
    const std::vector<double> less{-2.0};
    canvas.splat_segment({1, 1}, {1, 1}, less, less);
    CHECK(canvas.tensor().at(0, 1, 1) == -0.5f);
    Canvas over(FeatureTensor(1, 3, 3, {"v"}), 1, OverlapMode::overwrite);
    const std::vector<double> big{5.0};
    over.splat_segment({1, 1}, {1, 1}, big, big);
    over.splat_segment({1, 1}, {1, 1}, less, less);
    CHECK(over.tensor().at(0, 1, 1) == -2.0f);
}

TEST_CASE("splat rejects mismatched feature widths") {
    Canvas canvas(FeatureTensor(2, 3, 3, {"a", "b"}), 2, OverlapMode::max);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(canvas.splat_segment({0, 0}, {1, 1}, one, one), DimensionMismatch);
}

TEST_CASE("tensor labels must be distinct and counted") {
    CHECK_THROWS_AS(FeatureTensor(2, 2, 2, {"a", "a"}), FormatError);
    CHECK_THROWS_AS(FeatureTensor(2, 2, 2, {"a"}), DimensionMismatch);
    const FeatureTensor t(3, 2, 2, {"x", "y", "z"});
    CHECK(t.find_channel("z") == 2);
    CHECK(t.find_channel("w") == -1);
}

TEST_CASE("render config validation") {
    CHECK_NOTHROW(RenderConfig{}.validate());
    CHECK_THROWS_AS(RenderConfig({4, 48, OverlapMode::max}).validate(), ConfigError);
    CHECK_THROWS_AS(RenderConfig({48, 24, OverlapMode::max}).validate(), ConfigError);
}

TEST_CASE("a horizontal stroke lights exactly its row in the bitmap") {
    const Ink ink = resample_equidistant(Ink({Stroke({{0.0, 0.5}, {1.0, 0.5}})}), 1.0 / 24);
    const FeatureTensor t = render_with(ink, FeatureConfig{0, false, false, 1});
    REQUIRE(t.channels() == 1);
    REQUIRE(t.height() == 48);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) CHECK(t.at(0, y, x) == ((y == 24 && x >= 12 && x < 36) ? 1.0f : 0.0f));
    }
}

TEST_CASE("the bitmap channel is binary and nothing leaves the inner window") {
    Rng rng(42);
    for (int k = 0; k < 20; ++k) {
        std::vector<Point> pts;
        for (int i = 0; i < 6; ++i) pts.push_back({uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)});
        const Ink ink = resample_equidistant(add_imaginary_strokes(Ink({Stroke(pts), Stroke({{0.1, 0.9}, {0.9, 0.1}})})), 1.0 / 24);
        const FeatureTensor t = render_with(ink, FeatureConfig{2, true, true, 1});
        CHECK(t.channels() == 30);
        for (int c = 0; c < t.channels(); ++c) {
            for (int y = 0; y < 48; ++y) {
                for (int x = 0; x < 48; ++x) {
                    const float v = t.at(c, y, x);
                    CHECK(std::isfinite(v));
                    if (y < 12 || y >= 36 || x < 12 || x >= 36) CHECK(v == 0.0f);
                    if (c == 0 || c == 15) CHECK((v == 0.0f || v == 1.0f));
                }
            }
        }
    }
}

TEST_CASE("full-size grid with every feature is 30 x 96 x 96") {
    const Ink ink = resample_equidistant(add_imaginary_strokes(Ink({Stroke({{0, 0}, {1, 1}}), Stroke({{0, 1}, {1, 0}})})), 1.0 / 48);
    const FeatureTensor t = render_with(ink, FeatureConfig{2, true, true, 1}, RenderConfig{48, 96, OverlapMode::max});
    CHECK(t.channels() == 30);
    CHECK(t.height() == 96);
    CHECK(t.width() == 96);
    CHECK(t.labels() == FeatureConfig{2, true, true, 1}.channel_labels());
}

TEST_CASE("imaginary strokes render into the second block only") {
    const Ink ink = add_imaginary_strokes(Ink({Stroke({{0.0, 0.0}}), Stroke({{1.0, 1.0}})}));
    const FeatureTensor t = render_with(ink, FeatureConfig{0, false, true, 1});
    REQUIRE(t.channels() == 2);
    int real = 0;
    int imaginary = 0;
    for (float v : t.channel(0)) real += v != 0.0f;
    for (float v : t.channel(1)) imaginary += v != 0.0f;
    CHECK(real == 2);
    CHECK(imaginary == 24);
}

TEST_CASE("rendering is bit-identical under the identity transform") {
    const Ink ink = resample_equidistant(Ink({Stroke({{0.1, 0.3}, {0.8, 0.2}, {0.5, 0.9}})}), 1.0 / 24);
    const Ink same = transform_points(ink, [](Point p) { return p; });
    const FeatureConfig fc{2, true, false, 1};
    CHECK(render_with(ink, fc) == render_with(same, fc));
}

TEST_CASE("nonzero cells lie near the stroke support") {
    const Ink ink = resample_equidistant(Ink({Stroke({{0.1, 0.3}, {0.8, 0.2}, {0.5, 0.9}})}), 1.0 / 24);
    const FeatureTensor t = render_with(ink, FeatureConfig{2, true, false, 1});
    std::set<std::pair<int, int>> support;
    const auto& p = ink.strokes()[0].points();
    for (std::size_t i = 1; i < p.size(); ++i) {
        const GridPoint a{12 + unit_to_cell(p[i - 1].x, 24), 12 + unit_to_cell(p[i - 1].y, 24)};
        const GridPoint b{12 + unit_to_cell(p[i].x, 24), 12 + unit_to_cell(p[i].y, 24)};
        for (const GridPoint& g : bresenham_cells(a, b, 48, 48)) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) support.insert({g.x + dx, g.y + dy});
            }
        }
    }
    for (int c = 0; c < t.channels(); ++c) {
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 48; ++x) {
                if (t.at(c, y, x) != 0.0f) CHECK(support.contains({x, y}));
            }
        }
    }
}

TEST_CASE("render rejects features not aligned with the ink") {
    const Ink ink({Stroke({{0, 0}, {1, 1}})});
    const FeatureConfig fc{0, false, false, 1};
    CHECK_THROWS_AS(render(ink, {}, fc, RenderConfig{}), DimensionMismatch);
}
