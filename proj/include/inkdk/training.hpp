#pragma once

#include "inkdk/dataio.hpp"
#include "inkdk/net.hpp"
#include "inkdk/pipeline.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace inkdk {

struct EpochLog {
    int epoch = 0;
    double learning_rate = 0.0;
    double train_loss = 0.0;
    /// Accuracy on the held-out set, or nullopt without one.
    std::optional<double> holdout_accuracy;
};

struct FitOptions {
    /// Deform every training sample on the fly (seeded per sample and epoch).
    bool augment = true;
    std::function<void(const EpochLog&)> on_epoch;
};

struct FitResult {
    Network network;
    std::vector<EpochLog> log;
    /// Epoch whose weights were kept: best held-out accuracy, else the last.
    int best_epoch = 0;
};

/// Trains a freshly initialized network on `train`. Labels index into
/// class_table; samples whose label is missing from it are rejected.
/// Deterministic in (config.seed, data, configs).
FitResult fit(const ArchSpec& spec, const Dataset& train, const std::vector<std::string>& class_table,
              const PipelineConfig& pipeline, const TrainConfig& config, const Dataset* holdout = nullptr,
              const FitOptions& options = {});

/// Fraction of samples whose argmax matches the label.
double accuracy(const Network& net, const Dataset& data, const std::vector<std::string>& class_table,
                const PipelineConfig& pipeline);

} // namespace inkdk
