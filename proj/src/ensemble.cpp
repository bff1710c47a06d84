#include "inkdk/ensemble.hpp"

#include "inkdk/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace inkdk {

using nlohmann::json;

void Member::validate() const {
    pipeline.validate();
    const Shape& in = network.spec().input;
    if (in.c != pipeline.channels() || in.h != pipeline.render.outer || in.w != pipeline.render.outer)
        throw ConfigError("member '" + name + "' network input " + network.spec().to_string() +
                          " does not match its pipeline's " + std::to_string(pipeline.channels()) + "x" +
                          std::to_string(pipeline.render.outer) + "x" + std::to_string(pipeline.render.outer));
}

void CascadeConfig::validate() const {
    if (members.empty()) throw ConfigError("cascade needs at least one member");
    if (!(threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
    for (const Member& m : members) {
        m.validate();
        if (!class_table.empty() && m.network.spec().classes() != static_cast<int>(class_table.size()))
            throw ConfigError("member '" + m.name + "' does not share the class table");
    }
}

namespace {

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

} // namespace

std::vector<double> mean_probs(const std::vector<std::vector<double>>& member_probs) {
    std::vector<double> mean(member_probs.front().size(), 0.0);
    for (const auto& p : member_probs) {
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
    }
    for (double& v : mean) v /= static_cast<double>(member_probs.size());
    return mean;
}

Prediction hsp_decide(std::size_t member_count, double threshold,
                      const std::function<const std::vector<double>&(std::size_t)>& member_probs) {
    if (member_count == 0) throw InvalidArgument("cascade has no members");
    std::vector<std::vector<double>> seen;
    for (std::size_t k = 0; k < member_count; ++k) {
        const std::vector<double>& p = member_probs(k);
        seen.push_back(p);
        const int top = argmax(p);
        if (p[static_cast<std::size_t>(top)] > threshold)
            return {top, static_cast<int>(k) + 1, p, static_cast<int>(k) + 1};
    }
    std::vector<double> mean = mean_probs(seen);
    const int top = argmax(mean);
    return {top, std::nullopt, std::move(mean), static_cast<int>(member_count)};
}

int vote_decide(const std::vector<std::vector<double>>& member_probs) {
    if (member_probs.empty()) throw InvalidArgument("no member outputs to vote on");
    const std::vector<double> mean = mean_probs(member_probs);
    std::vector<int> votes(mean.size(), 0);
    for (const auto& p : member_probs) ++votes[static_cast<std::size_t>(argmax(p))];
    int best = 0;
    for (int k = 1; k < static_cast<int>(votes.size()); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const auto bu = static_cast<std::size_t>(best);
        if (votes[ku] > votes[bu] || (votes[ku] == votes[bu] && mean[ku] > mean[bu])) best = k;
    }
    return best;
}

int average_decide(const std::vector<std::vector<double>>& member_probs) {
    if (member_probs.empty()) throw InvalidArgument("no member outputs to average");
    return argmax(mean_probs(member_probs));
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

// Lazily evaluates members on one sample, sharing preprocessing between
// members whose pipelines agree and timing each stage.
class SampleRunner {
public:
    SampleRunner(const std::vector<Member>& members, const Ink& ink)
        : members_(members), cache_(ink), probs_(members.size()) {}

    const std::vector<double>& probs(std::size_t k) {
        if (!probs_[k]) {
            const Member& m = members_[k];
            const auto t0 = Clock::now();
            const FeatureTensor x = featurize_prepared(cache_.get(m.pipeline), m.pipeline);
            const auto t1 = Clock::now();
            probs_[k] = forward(m.network, x);
            const auto t2 = Clock::now();
            featurize_ms += ms_between(t0, t1);
            forward_ms += ms_between(t1, t2);
        }
        return *probs_[k];
    }

    std::vector<std::vector<double>> all(std::size_t count) {
        std::vector<std::vector<double>> out;
        for (std::size_t k = 0; k < count; ++k) out.push_back(probs(k));
        return out;
    }

    double featurize_ms = 0.0;
    double forward_ms = 0.0;

private:
    const std::vector<Member>& members_;
    PreparedInkCache cache_;
    std::vector<std::optional<std::vector<double>>> probs_;
};

} // namespace

Prediction hsp_predict(const CascadeConfig& cascade, const Ink& ink) {
    SampleRunner runner(cascade.members, ink);
    return hsp_decide(cascade.members.size(), cascade.threshold,
                      [&](std::size_t k) -> const std::vector<double>& { return runner.probs(k); });
}

int vote_predict(const std::vector<Member>& members, const Ink& ink) {
    SampleRunner runner(members, ink);
    return vote_decide(runner.all(members.size()));
}

int average_predict(const std::vector<Member>& members, const Ink& ink) {
    SampleRunner runner(members, ink);
    return average_decide(runner.all(members.size()));
}

const char* to_string(Method m) noexcept {
    switch (m) {
    case Method::single: return "single";
    case Method::hsp: return "hsp";
    case Method::vote: return "vote";
    case Method::average: return "average";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::single, Method::hsp, Method::vote, Method::average}) {
        if (name == to_string(m)) return m;
    }
    throw ConfigError("unknown method '" + name + "' (expected single|hsp|vote|average)");
}

EvalReport evaluate(const CascadeConfig& cascade, const Dataset& data, Method method) {
    cascade.validate();
    const std::size_t n_members = cascade.members.size();
    EvalReport report;
    report.method = method;
    report.threshold = cascade.threshold;
    report.samples = data.size();
    if (method == Method::hsp || method == Method::single) report.exit_counts.assign(n_members + 1, 0);

    const std::vector<std::string>& table =
        cascade.class_table.empty() ? data.class_table() : cascade.class_table;
    std::size_t members_total = 0;
    double total_ms = 0.0;
    double featurize_ms = 0.0;
    double forward_ms = 0.0;
    for (const Ink& ink : data.samples()) {
        const auto t0 = Clock::now();
        SampleRunner runner(cascade.members, ink);
        int decision = 0;
        switch (method) {
        case Method::single:
            decision = argmax(runner.probs(0));
            ++report.exit_counts[0];
            members_total += 1;
            break;
        case Method::hsp: {
            const Prediction p = hsp_decide(n_members, cascade.threshold,
                                            [&](std::size_t k) -> const std::vector<double>& { return runner.probs(k); });
            decision = p.label;
            ++report.exit_counts[p.stage ? static_cast<std::size_t>(*p.stage - 1) : n_members];
            members_total += static_cast<std::size_t>(p.members_evaluated);
            break;
        }
        case Method::vote:
            decision = vote_decide(runner.all(n_members));
            members_total += n_members;
            break;
        case Method::average:
            decision = average_decide(runner.all(n_members));
            members_total += n_members;
            break;
        }
        const auto t1 = Clock::now();
        total_ms += ms_between(t0, t1);
        featurize_ms += runner.featurize_ms;
        forward_ms += runner.forward_ms;

        report.decisions.push_back(decision);
        const auto it = std::find(table.begin(), table.end(), ink.label().value_or(""));
        if (it != table.end() && static_cast<int>(it - table.begin()) == decision) ++report.correct;
    }
    if (report.samples > 0) {
        const auto n = static_cast<double>(report.samples);
        report.accuracy = static_cast<double>(report.correct) / n;
        report.mean_members = static_cast<double>(members_total) / n;
        report.ms_per_sample = total_ms / n;
        report.featurize_ms_per_sample = featurize_ms / n;
        report.forward_ms_per_sample = forward_ms / n;
    }
    return report;
}

json EvalReport::to_json(bool include_timing) const {
    json j{{"method", inkdk::to_string(method)},
           {"threshold", threshold},
           {"samples", samples},
           {"correct", correct},
           {"accuracy", accuracy},
           {"mean_members_evaluated", mean_members}};
    if (!exit_counts.empty()) {
        j["exit_counts"] = exit_counts;
    }
    if (include_timing) {
        j["ms_per_sample"] = ms_per_sample;
        j["featurize_ms_per_sample"] = featurize_ms_per_sample;
        j["forward_ms_per_sample"] = forward_ms_per_sample;
    }
    return j;
}

std::string EvalReport::table() const {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-26s %s\n", "method", inkdk::to_string(method));
    out << line;
    if (method == Method::hsp) {
        std::snprintf(line, sizeof line, "%-26s %.4f\n", "threshold", threshold);
        out << line;
    }
    std::snprintf(line, sizeof line, "%-26s %zu / %zu = %.4f\n", "accuracy", correct, samples, accuracy);
    out << line;
    std::snprintf(line, sizeof line, "%-26s %.3f\n", "members evaluated / sample", mean_members);
    out << line;
    std::snprintf(line, sizeof line, "%-26s %.4f (featurize %.4f, forward %.4f)\n", "ms / sample", ms_per_sample,
                  featurize_ms_per_sample, forward_ms_per_sample);
    out << line;
    for (std::size_t k = 0; k < exit_counts.size(); ++k) {
        const std::string name = k + 1 == exit_counts.size() ? "exit fallback" : "exit stage " + std::to_string(k + 1);
        std::snprintf(line, sizeof line, "%-26s %zu\n", name.c_str(), exit_counts[k]);
        out << line;
    }
    return out.str();
}

} // namespace inkdk
