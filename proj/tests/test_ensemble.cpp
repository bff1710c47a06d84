#include "inkdk/dataio.hpp"
#include "inkdk/ensemble.hpp"
#include "inkdk/error.hpp"
#include "inkdk/rng.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace inkdk;

namespace {

using Probs = std::vector<std::vector<double>>;

Prediction decide(const Probs& probs, double threshold, int* calls = nullptr) {
    return hsp_decide(probs.size(), threshold, [&](std::size_t k) -> const std::vector<double>& {
        if (calls) ++*calls;
        return probs[k];
    });
}

// Reference cascade written out directly from the decision rule.
int oracle(const Probs& probs, double threshold) {
    for (const auto& p : probs) {
        int top = 0;
        for (int k = 1; k < static_cast<int>(p.size()); ++k) {
            if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(top)]) top = k;
        }
        if (p[static_cast<std::size_t>(top)] > threshold) return top;
    }
    std::vector<double> mean(probs[0].size(), 0.0);
    for (const auto& p : probs) {
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k] / static_cast<double>(probs.size());
    }
    int top = 0;
    for (int k = 1; k < static_cast<int>(mean.size()); ++k) {
        if (mean[static_cast<std::size_t>(k)] > mean[static_cast<std::size_t>(top)]) top = k;
    }
    return top;
}

std::vector<double> random_simplex(Rng& rng, int n, double sharpness) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& v : p) {
        v = std::pow(uniform(rng, 0.0, 1.0), sharpness);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

CascadeConfig tiny_cascade(const Dataset& data, std::uint64_t seed) {
    CascadeConfig c;
    c.class_table = data.class_table();
    int index = 0;
    for (char name : std::string("ACFG")) {
        PipelineConfig pc = preset(name);
        pc.render = {8, 12, OverlapMode::max};
        const ArchSpec spec = parse_arch(resolve_arch("Mx12x12-4C3-MP2-8N-Output", pc.channels(),
                                                      static_cast<int>(data.class_table().size())));
        c.members.push_back({std::string(1, name), pc, Network::init(spec, derive_seed(seed, "member", index++))});
    }
    return c;
}

} // namespace

TEST_CASE("a confident first stage exits immediately") {
    int calls = 0;
    const Prediction p = decide({{0.995, 0.005}, {0.0, 1.0}}, 0.99, &calls);
    CHECK(p.label == 0);
    CHECK(p.stage == 1);
    CHECK(p.members_evaluated == 1);
    CHECK(calls == 1);
}

TEST_CASE("the exit test is strict") {
    const Prediction p = decide({{0.99, 0.01}, {0.005, 0.995}}, 0.99);
    CHECK(p.stage == 2);
    CHECK(p.label == 1);
}

TEST_CASE("without a confident stage the mean decides") {
    const Prediction p = decide({{0.6, 0.3, 0.1}, {0.2, 0.7, 0.1}, {0.4, 0.5, 0.1}}, 0.99);
    CHECK_FALSE(p.stage.has_value());
    CHECK(p.members_evaluated == 3);
    CHECK(p.label == 1);
    CHECK(p.probs[0] == doctest::Approx(0.4));
    CHECK(p.probs[1] == doctest::Approx(0.5));
    CHECK(p.probs[2] == doctest::Approx(0.1));
}

TEST_CASE("threshold zero always takes the first member") {
    const Prediction p = decide({{0.3, 0.35, 0.35}, {1.0, 0.0, 0.0}}, 0.0);
    CHECK(p.stage == 1);
    CHECK(p.label == 1);
}

TEST_CASE("voting is a plurality with probability tie-breaks") {
    CHECK(vote_decide({{0.9, 0.1}, {0.6, 0.4}, {0.1, 0.9}}) == 0);
    CHECK(vote_decide({{0.55, 0.45, 0.0}, {0.35, 0.65, 0.0}}) == 1);
    CHECK(vote_decide({{0.5, 0.5}, {0.5, 0.5}}) == 0);
    CHECK_THROWS_AS(vote_decide({}), InvalidArgument);
}

TEST_CASE("averaging takes the mean argmax") {
    CHECK(average_decide({{0.6, 0.4}, {0.1, 0.9}}) == 1);
    CHECK(average_decide({{0.5, 0.5}}) == 0);
}

TEST_CASE("cascade agrees with the reference rule on random outputs") {
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const int members = 1 + static_cast<int>(rng() % 5);
        const int classes = 2 + static_cast<int>(rng() % 6);
        Probs probs;
        for (int m = 0; m < members; ++m) probs.push_back(random_simplex(rng, classes, 1.0 + 8.0 * uniform(rng, 0.0, 1.0)));
        const double threshold = uniform(rng, 0.3, 1.0);
        int calls = 0;
        const Prediction p = decide(probs, threshold, &calls);
        CHECK(p.label == oracle(probs, threshold));
        CHECK(calls == p.members_evaluated);
        CHECK(decide(probs, 2.0).label == average_decide(probs));
        CHECK(decide(probs, 0.0).label == decide({probs[0]}, 0.0).label);
    }
}

TEST_CASE("methods parse by name") {
    for (Method m : {Method::single, Method::hsp, Method::vote, Method::average}) CHECK(method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(method_from_string("median"), ConfigError);
}

TEST_CASE("evaluation methods agree at the threshold extremes") {
    const Dataset data = synth_dataset(SynthConfig{4, 6, 0.03, 21});
    CascadeConfig c = tiny_cascade(data, 3);
    c.threshold = 2.0;
    const EvalReport never = evaluate(c, data, Method::hsp);
    CHECK(never.decisions == evaluate(c, data, Method::average).decisions);
    CHECK(never.mean_members == 4.0);
    CHECK(never.exit_counts.back() == data.size());
    c.threshold = 0.0;
    const EvalReport always = evaluate(c, data, Method::hsp);
    const EvalReport single = evaluate(c, data, Method::single);
    CHECK(always.decisions == single.decisions);
    CHECK(always.mean_members == 1.0);
    CHECK(always.exit_counts.front() == data.size());
}

TEST_CASE("evaluate matches the per-sample predictors") {
    const Dataset data = synth_dataset(SynthConfig{4, 3, 0.03, 22});
    CascadeConfig c = tiny_cascade(data, 4);
    c.threshold = 0.3;
    const EvalReport hsp = evaluate(c, data, Method::hsp);
    const EvalReport vote = evaluate(c, data, Method::vote);
    const EvalReport average = evaluate(c, data, Method::average);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Ink& ink = data.samples()[i];
        CHECK(hsp.decisions[i] == hsp_predict(c, ink).label);
        CHECK(vote.decisions[i] == vote_predict(c.members, ink));
        CHECK(average.decisions[i] == average_predict(c.members, ink));
        correct += data.class_index(*ink.label()) == hsp.decisions[i];
    }
    CHECK(hsp.correct == correct);
    CHECK(hsp.accuracy == doctest::Approx(static_cast<double>(correct) / static_cast<double>(data.size())));
    std::size_t exits = 0;
    for (std::size_t n : hsp.exit_counts) exits += n;
    CHECK(exits == data.size());
}

TEST_CASE("report JSON omits timing on request") {
    const Dataset data = synth_dataset(SynthConfig{4, 2, 0.03, 23});
    const EvalReport r = evaluate(tiny_cascade(data, 5), data, Method::hsp);
    const nlohmann::json with = r.to_json(true);
    const nlohmann::json without = r.to_json(false);
    CHECK(with.contains("ms_per_sample"));
    CHECK_FALSE(without.contains("ms_per_sample"));
    CHECK(without.at("samples") == data.size());
    CHECK(r.table().find("accuracy") != std::string::npos);
}

TEST_CASE("cascade validation") {
    const Dataset data = synth_dataset(SynthConfig{4, 1, 0.03, 24});
    CascadeConfig c = tiny_cascade(data, 6);
    CHECK_NOTHROW(c.validate());
    c.threshold = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_cascade(data, 6);
    c.members[1].pipeline = preset('H');
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_cascade(data, 6);
    c.class_table.pop_back();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(CascadeConfig{}.validate(), ConfigError);
}
