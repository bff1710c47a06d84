#include "inkdk/error.hpp"
#include "inkdk/net.hpp"
#include "inkdk/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace inkdk;

namespace {

FeatureTensor random_tensor(const Shape& s, std::uint64_t seed) {
    std::vector<std::string> labels;
    for (int c = 0; c < s.c; ++c) labels.push_back("c" + std::to_string(c));
    FeatureTensor t(s.c, s.h, s.w, labels);
    Rng rng(seed);
    for (float& v : t.data()) v = static_cast<float>(uniform(rng, -1.0, 1.0));
    return t;
}

TrainConfig toy_config(const ArchSpec& spec) {
    TrainConfig c;
    c.batch_size = 1;
    c.learning_rate = 0.05;
    c.dropout.assign(static_cast<std::size_t>(spec.weighted_layer_count()), 0.0);
    return c;
}

} // namespace

TEST_CASE("full-size architecture parses with the expected trace") {
    const ArchSpec s = parse_arch("1x96x96-80C3-MP2-160C2-MP2-240C2-MP2-320C2-MP2-400C2-480N-512N-3740Output");
    CHECK(s.spatial_trace() == std::vector<int>{96, 94, 47, 46, 23, 22, 11, 10, 5, 4});
    int convs = 0;
    int pools = 0;
    for (const LayerSpec& l : s.layers) {
        convs += l.kind == LayerKind::conv;
        pools += l.kind == LayerKind::pool;
    }
    CHECK(convs == 5);
    CHECK(pools == 4);
    CHECK(s.weighted_layer_count() == 8);
    CHECK(s.classes() == 3740);
    MESSAGE("full-size parameter count: " << s.parameter_count());
    CHECK(s.parameter_count() > 1000000);
}

TEST_CASE("parameter counts follow layer shapes") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-2Output");
    CHECK(s.spatial_trace() == std::vector<int>{8, 6, 3});
    const std::size_t conv = 2 * (9 + 1);
    const std::size_t full = 4 * (2 * 3 * 3 + 1);
    const std::size_t out = 2 * (4 + 1);
    CHECK(s.parameter_count() == conv + full + out);
    CHECK(Network::init(s, 1).parameter_count() == s.parameter_count());
}

TEST_CASE("canonical strings round-trip") {
    for (const char* text : {"1x8x8-2C3-MP2-4N-2Output", "3x12x12-4C3-MP2-8C2-5Output",
                             "1x96x96-80C3-MP2-160C2-MP2-240C2-MP2-320C2-MP2-400C2-480N-512N-3740Output"}) {
        const ArchSpec s = parse_arch(text);
        CHECK(s.to_string() == text);
        CHECK(parse_arch(s.to_string()) == s);
    }
}

TEST_CASE("malformed and impossible architectures are rejected") {
    CHECK_THROWS_AS(parse_arch("1x4x4-2C5-2Output"), ShapeError);
    CHECK_THROWS_AS(parse_arch("1x2x2-MP2-MP2-2Output"), ShapeError);
    CHECK_THROWS_AS(parse_arch("1x8x8-2Q3-2Output"), SyntaxError);
    CHECK_THROWS_AS(parse_arch("1x8-2C3-2Output"), SyntaxError);
    CHECK_THROWS_AS(parse_arch("1x8x8-2C3"), SyntaxError);
    CHECK_THROWS_AS(parse_arch("1x8x8-0C3-2Output"), SyntaxError);
    CHECK_THROWS_AS(parse_arch("Mx8x8-2C3-2Output"), SyntaxError);
    CHECK_THROWS_AS(parse_arch(""), SyntaxError);
}

TEST_CASE("placeholders resolve to concrete values") {
    CHECK(resolve_arch("Mx8x8-2C3-Output", 7, 3) == "7x8x8-2C3-3Output");
    CHECK(resolve_arch("2x8x8-2C3-5Output", 7, 3) == "2x8x8-2C3-5Output");
}

TEST_CASE("initialization is seeded with zero biases and fan-in variance") {
    const ArchSpec s = parse_arch("1x20x20-40C3-MP2-64N-10Output");
    const Network a = Network::init(s, 5);
    CHECK(a == Network::init(s, 5));
    CHECK_FALSE(a == Network::init(s, 6));
    const auto p = a.parameters();
    for (std::size_t k = 0; k < a.blocks().size(); ++k) {
        const ParamBlock& b = a.blocks()[k];
        for (std::size_t i = 0; i < b.rows; ++i) CHECK(p[b.bias_offset + i] == 0.0);
        const std::size_t n = b.rows * b.cols;
        if (n < 1000) continue;
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += p[b.weight_offset + i];
            sq += p[b.weight_offset + i] * p[b.weight_offset + i];
        }
        const double mean = sum / static_cast<double>(n);
        const double var = sq / static_cast<double>(n) - mean * mean;
        const double expected = 2.0 / static_cast<double>(b.cols);
        CHECK(std::abs(var - expected) / expected < 0.2);
    }
}

TEST_CASE("zero network predicts the uniform distribution") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-5Output");
    const auto p = forward(Network::zeros(s), random_tensor(s.input, 1));
    for (double v : p) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("probabilities are normalized and eval forward is deterministic") {
    const ArchSpec s = parse_arch("2x10x10-3C3-MP2-6N-4Output");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Network net = Network::init(s, seed);
        const FeatureTensor x = random_tensor(s.input, seed + 100);
        const auto p = forward(net, x);
        double sum = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
        CHECK(forward(net, x) == p);
    }
}

TEST_CASE("zero dropout makes train mode equal eval mode") {
    const ArchSpec s = parse_arch("2x10x10-3C3-MP2-6N-4Output");
    const Network net = Network::init(s, 3);
    const FeatureTensor x = random_tensor(s.input, 4);
    const std::vector<double> rates(static_cast<std::size_t>(s.weighted_layer_count()), 0.0);
    CHECK(forward(net, x, {true, 99, rates}) == forward(net, x));
}

TEST_CASE("dropout is seeded") {
    const ArchSpec s = parse_arch("2x10x10-3C3-MP2-6N-4Output");
    const Network net = Network::init(s, 3);
    const FeatureTensor x = random_tensor(s.input, 4);
    const std::vector<double> rates(static_cast<std::size_t>(s.weighted_layer_count()), 0.5);
    CHECK(forward(net, x, {true, 7, rates}) == forward(net, x, {true, 7, rates}));
    CHECK(forward(net, x, {true, 7, rates}) != forward(net, x, {true, 8, rates}));
}

TEST_CASE("forward rejects a wrong input shape") {
    const ArchSpec s = parse_arch("2x10x10-3C3-MP2-6N-4Output");
    CHECK_THROWS_AS(forward(Network::init(s, 1), random_tensor({1, 10, 10}, 1)), ShapeMismatch);
    CHECK_THROWS_AS(forward(Network::init(s, 1), random_tensor({2, 9, 10}, 1)), ShapeMismatch);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-3Output");
    Network net = Network::init(s, 2);
    const Network before = net;
    TrainConfig c = toy_config(s);
    c.learning_rate = 0.0;
    const std::vector<LabeledTensor> batch{{random_tensor(s.input, 1), 1}};
    const double loss = train_step(net, batch, c, 0);
    CHECK(std::isfinite(loss));
    CHECK(std::equal(net.parameters().begin(), net.parameters().end(), before.parameters().begin()));
}

TEST_CASE("untrained loss is close to ln C") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-6Output");
    Network net = Network::zeros(s);
    const std::vector<LabeledTensor> batch{{random_tensor(s.input, 1), 2}, {random_tensor(s.input, 2), 5}};
    std::vector<double> g;
    const double loss = loss_and_gradient(net, batch, {}, g);
    CHECK(std::abs(loss - std::log(6.0)) / std::log(6.0) < 0.1);
    CHECK(g.size() == net.parameter_count());
}

TEST_CASE("a single sample can be overfit") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-3Output");
    Network net = Network::init(s, 11);
    const std::vector<LabeledTensor> batch{{random_tensor(s.input, 12), 2}};
    const TrainConfig c = toy_config(s);
    double loss = 0.0;
    for (int step = 0; step < 200; ++step) loss = train_step(net, batch, c, static_cast<std::uint64_t>(step));
    std::vector<double> g;
    loss = loss_and_gradient(net, batch, {}, g);
    CHECK(loss < 0.01);
}

TEST_CASE("training is deterministic") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-3Output");
    TrainConfig c = toy_config(s);
    c.dropout.assign(c.dropout.size(), 0.25);
    const std::vector<LabeledTensor> batch{{random_tensor(s.input, 1), 0}, {random_tensor(s.input, 2), 1}};
    Network a = Network::init(s, 4);
    Network b = Network::init(s, 4);
    for (int step = 0; step < 10; ++step) {
        CHECK(train_step(a, batch, c, static_cast<std::uint64_t>(step)) ==
              train_step(b, batch, c, static_cast<std::uint64_t>(step)));
    }
    CHECK(a == b);
}

TEST_CASE("analytic gradients agree with finite differences") {
    const ArchSpec s = parse_arch("2x9x9-3C2-MP2-5N-4Output");
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const GradCheckResult r = grad_check(s, seed);
        CHECK(r.checked >= 50);
        CHECK(r.max_relative_error < 1e-4);
    }
}

TEST_CASE("output-only linear network has a tight gradient check") {
    const ArchSpec s = parse_arch("2x4x4-3Output");
    for (std::uint64_t seed : {1u, 2u, 3u}) CHECK(grad_check(s, seed).max_relative_error < 1e-6);
}

TEST_CASE("an injected gradient fault is detected") {
    GradCheckOptions o;
    o.fault = 0.01;
    CHECK(grad_check(parse_arch("2x9x9-3C2-MP2-5N-4Output"), 1, o).max_relative_error > 1e-3);
}

TEST_CASE("zero input gives zero first-layer weight gradients") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-3Output");
    const Network net = Network::init(s, 9);
    FeatureTensor x(1, 8, 8, {"c0"});
    const std::vector<LabeledTensor> batch{{x, 1}};
    std::vector<double> g;
    loss_and_gradient(net, batch, {}, g);
    const ParamBlock& first = net.blocks().front();
    for (std::size_t i = 0; i < first.rows * first.cols; ++i) CHECK(g[first.weight_offset + i] == 0.0);
    const ParamBlock& last = net.blocks().back();
    bool any = false;
    for (std::size_t i = 0; i < last.rows; ++i) any = any || g[last.bias_offset + i] != 0.0;
    CHECK(any);
}

TEST_CASE("train config validation") {
    const ArchSpec s = parse_arch("1x8x8-2C3-MP2-4N-3Output");
    TrainConfig c = toy_config(s);
    CHECK_NOTHROW(c.validate(s));
    c.dropout.pop_back();
    CHECK_THROWS_AS(c.validate(s), ConfigError);
    c = toy_config(s);
    c.dropout[0] = 1.0;
    CHECK_THROWS_AS(c.validate(s), ConfigError);
    c = toy_config(s);
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(s), ConfigError);
    c = toy_config(s);
    c.learning_rate = -1.0;
    CHECK_THROWS_AS(c.validate(s), ConfigError);
}

TEST_CASE("set_parameters checks the size") {
    Network net = Network::init(parse_arch("1x8x8-2C3-MP2-4N-3Output"), 1);
    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(net.set_parameters(wrong), ShapeMismatch);
}
