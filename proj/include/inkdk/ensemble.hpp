#pragma once

#include "inkdk/dataio.hpp"
#include "inkdk/net.hpp"
#include "inkdk/pipeline.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace inkdk {

struct Member {
    std::string name;
    PipelineConfig pipeline;
    Network network;

    /// Throws ConfigError when the network input is not the rendered shape.
    void validate() const;
};

/// Hybrid serial-parallel cascade: members in evaluation order plus the
/// exit threshold T, and the class table shared by every member.
struct CascadeConfig {
    std::vector<Member> members;
    double threshold = 0.99;
    std::vector<std::string> class_table;

    void validate() const;
};

struct Prediction {
    int label = 0;
    /// 1-based stage that exited, or nullopt when the decision fell back to
    /// the average of all members.
    std::optional<int> stage;
    std::vector<double> probs;
    int members_evaluated = 0;
};

/// Cascade decision over lazily computed member outputs: the first member
/// whose top probability is strictly greater than threshold decides;
/// otherwise the argmax of the mean of all members' outputs.
Prediction hsp_decide(std::size_t member_count, double threshold,
                      const std::function<const std::vector<double>&(std::size_t)>& member_probs);

/// Plurality of per-member argmaxes; ties go to the tied class with the
/// highest mean probability, then to the lowest index.
int vote_decide(const std::vector<std::vector<double>>& member_probs);
/// Argmax (lowest index on ties) of the mean probability vector.
int average_decide(const std::vector<std::vector<double>>& member_probs);
std::vector<double> mean_probs(const std::vector<std::vector<double>>& member_probs);

Prediction hsp_predict(const CascadeConfig& cascade, const Ink& ink);
int vote_predict(const std::vector<Member>& members, const Ink& ink);
int average_predict(const std::vector<Member>& members, const Ink& ink);

enum class Method { single, hsp, vote, average };

const char* to_string(Method m) noexcept;
/// Throws ConfigError for unknown names.
Method method_from_string(const std::string& name);

struct EvalReport {
    Method method = Method::hsp;
    double threshold = 0.0;
    std::size_t samples = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    /// HSP and single: exits per stage, the last slot counting fallbacks.
    std::vector<std::size_t> exit_counts;
    double mean_members = 0.0;
    double ms_per_sample = 0.0;
    double featurize_ms_per_sample = 0.0;
    double forward_ms_per_sample = 0.0;
    /// Decided class index per sample.
    std::vector<int> decisions;

    nlohmann::json to_json(bool include_timing = true) const;
    std::string table() const;
};

/// Runs the method over every sample. Accuracy and decisions are
/// deterministic; the timing fields are wall-clock measurements.
EvalReport evaluate(const CascadeConfig& cascade, const Dataset& data, Method method);

} // namespace inkdk
