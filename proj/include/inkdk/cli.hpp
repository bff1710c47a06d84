#pragma once

#include "inkdk/dataio.hpp"
#include "inkdk/ensemble.hpp"
#include "inkdk/net.hpp"
#include "inkdk/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace inkdk {

inline constexpr const char* tool_version = "0.1.0";

inline constexpr const char* desk_arch = "Mx48x48-16C3-MP2-32C2-MP2-48C2-MP2-64C2-MP2-80C2-96N-Output";
inline constexpr double desk_dropout[] = {0.0, 0.0, 0.0, 0.0, 0.05, 0.1, 0.2};

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2 };

/// One JSON document describing a whole run:
///
///   {"seed": 1, "output_dir": "run",
///    "dataio": {"synth": {"num_classes", "samples_per_class", "test_per_class", "jitter_scale"}},
///    "preset": "C", "features": {...}, "raster": {...}, "nln": {...}, "augment": {...},
///    "net": {"arch", "batch_size", "learning_rate", "momentum", "lr_decay", "dropout",
///            "epochs", "holdout_every"},
///    "ensemble": {"threshold"}}
///
/// Every block is optional. Component seeds are derived from `seed`.
struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "run";

    SynthConfig synth{10, 200, 0.03, 0};
    int test_per_class = 50;

    PipelineConfig pipeline;

    std::string arch = desk_arch;
    TrainConfig train;
    /// Explicit dropout list; absent means the desk list for the desk
    /// architecture and zeros otherwise.
    std::optional<std::vector<double>> dropout;
    /// Every n-th training sample is held out when no validation set is given
    /// (0 disables the held-out split).
    int holdout_every = 10;

    double threshold = 0.99;

    /// Cross-block checks: the architecture must parse, take the pipeline's
    /// channel count and agree with the dropout list. Throws ConfigError.
    void validate() const;

    /// Architecture resolved for this pipeline and class count.
    ArchSpec arch_spec(int classes) const;
    /// Training parameters with the derived seed and resolved dropout list.
    TrainConfig train_config(const ArchSpec& spec) const;
    /// Synthesis parameters with the derived seed.
    SynthConfig synth_config() const;

    nlohmann::json to_json() const;
    /// FNV-1a of the canonical JSON form, 16 hex digits.
    std::string hash() const;
};

/// Throws ConfigError on malformed or unknown fields; validates.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Hash of a pipeline's canonical JSON form.
std::string pipeline_hash(const PipelineConfig& pipeline);
std::string hash_hex(const std::string& text);

/// POT for a ".pot" extension, JSON-lines otherwise.
Dataset load_dataset(const std::filesystem::path& path);

/// Tensor archive: "IKA1", u16 version, u32-prefixed metadata JSON, u32
/// count, then per sample a u16-prefixed label and a u32-prefixed tensor
/// file image.
struct TensorArchive {
    nlohmann::json metadata;
    std::vector<std::string> labels;
    std::vector<FeatureTensor> tensors;
};
std::vector<std::uint8_t> encode_archive(const TensorArchive& archive);
TensorArchive decode_archive(std::span<const std::uint8_t> bytes);

struct SynthArgs {
    std::filesystem::path out;
    bool force = false;
};
/// Writes train.jsonl, test.jsonl and manifest.json.
void cmd_synth(const RunConfig& config, const SynthArgs& args, std::ostream& log);

struct FeaturizeArgs {
    std::filesystem::path dataset;
    std::filesystem::path out;
    bool train_mode = false;
    bool force = false;
};
void cmd_featurize(const RunConfig& config, const FeaturizeArgs& args, std::ostream& log);

struct TrainArgs {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> valid;
    std::filesystem::path out;
    bool force = false;
};
/// Writes weights.ikw, train_log.jsonl and train_report.json.
void cmd_train(const RunConfig& config, const TrainArgs& args, std::ostream& log);

struct EvalArgs {
    std::optional<std::filesystem::path> weights;
    std::optional<std::filesystem::path> manifest;
    std::filesystem::path dataset;
    Method method = Method::hsp;
    std::optional<double> threshold;
    /// Pipeline to check the weights against; nullopt trusts the weights.
    std::optional<PipelineConfig> expected_pipeline;
    std::optional<std::filesystem::path> out;
    bool timing = true;
    bool force = false;
};
/// Ensemble manifest:
///   {"threshold": 0.99, "members": [{"name": "A", "weights": "a/weights.ikw",
///                                     "pipeline": {...}}]}
/// Weight paths are relative to the manifest. A member's pipeline block is
/// optional and must hash like the one stored in its weights unless forced.
CascadeConfig load_cascade(const EvalArgs& args);
EvalReport cmd_eval(const EvalArgs& args, std::ostream& log);

struct Pot2JsonArgs {
    std::filesystem::path input;
    std::filesystem::path out;
    bool force = false;
};
void cmd_pot2json(const Pot2JsonArgs& args, std::ostream& log);

/// Runs fn and maps exceptions to exit codes: ConfigError 2, other errors 1.
template <class F>
int guarded(std::ostream& err, F&& fn);

} // namespace inkdk

#include "inkdk/error.hpp"

#include <ostream>

template <class F>
int inkdk::guarded(std::ostream& err, F&& fn) {
    try {
        fn();
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}
