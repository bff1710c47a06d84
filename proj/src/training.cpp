#include "inkdk/training.hpp"

#include "inkdk/error.hpp"
#include "inkdk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace inkdk {

namespace {

int label_index(const Ink& ink, const std::vector<std::string>& class_table) {
    const auto it = std::find(class_table.begin(), class_table.end(), ink.label().value_or(""));
    return it == class_table.end() ? -1 : static_cast<int>(it - class_table.begin());
}

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

} // namespace

double accuracy(const Network& net, const Dataset& data, const std::vector<std::string>& class_table,
                const PipelineConfig& pipeline) {
    if (data.empty()) return 0.0;
    std::size_t correct = 0;
    for (const Ink& ink : data.samples()) {
        const std::vector<double> probs = forward(net, featurize(ink, pipeline));
        if (argmax(probs) == label_index(ink, class_table)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

FitResult fit(const ArchSpec& spec, const Dataset& train, const std::vector<std::string>& class_table,
              const PipelineConfig& pipeline, const TrainConfig& config, const Dataset* holdout,
              const FitOptions& options) {
    config.validate(spec);
    pipeline.validate();
    if (train.empty()) throw InvalidArgument("training set is empty");
    if (spec.input.c != pipeline.channels() || spec.input.h != pipeline.render.outer ||
        spec.input.w != pipeline.render.outer)
        throw ConfigError("architecture input " + spec.to_string() + " does not match the pipeline's " +
                          std::to_string(pipeline.channels()) + "x" + std::to_string(pipeline.render.outer) + "x" +
                          std::to_string(pipeline.render.outer) + " tensors");
    if (spec.classes() != static_cast<int>(class_table.size()))
        throw ConfigError("architecture has " + std::to_string(spec.classes()) + " outputs but there are " +
                          std::to_string(class_table.size()) + " classes");

    std::vector<int> labels;
    for (const Ink& ink : train.samples()) {
        const int l = label_index(ink, class_table);
        if (l < 0) throw InvalidArgument("training label '" + ink.label().value_or("") + "' is not in the class table");
        labels.push_back(l);
    }

    // Without augmentation every epoch sees the same tensors.
    std::vector<FeatureTensor> fixed;
    if (!options.augment) {
        for (const Ink& ink : train.samples()) fixed.push_back(featurize(ink, pipeline));
    }

    FitResult result{Network::init(spec, derive_seed(config.seed, "init")), {}, 0};
    Network best = result.network;
    double best_accuracy = -1.0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    TrainConfig step_config = config;
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        step_config.learning_rate = config.learning_rate * std::pow(config.lr_decay, epoch);
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        std::vector<LabeledTensor> batch;
        for (std::size_t start = 0, b = 0; start < order.size(); start += batch_size, ++b) {
            batch.clear();
            for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k) {
                const std::size_t idx = order[k];
                if (options.augment) {
                    const std::uint64_t seed =
                        derive_seed(config.seed, "deform", idx, static_cast<std::uint64_t>(epoch));
                    batch.push_back({featurize(train.samples()[idx], pipeline, seed), labels[idx]});
                } else {
                    batch.push_back({fixed[idx], labels[idx]});
                }
            }
            const double loss = train_step(result.network, batch, step_config,
                                           derive_seed(config.seed, "step", static_cast<std::uint64_t>(epoch), b));
            loss_sum += loss * static_cast<double>(batch.size());
            seen += batch.size();
        }

        EpochLog entry{epoch, step_config.learning_rate, loss_sum / static_cast<double>(seen), std::nullopt};
        if (holdout != nullptr && !holdout->empty()) {
            entry.holdout_accuracy = accuracy(result.network, *holdout, class_table, pipeline);
            if (*entry.holdout_accuracy > best_accuracy) {
                best_accuracy = *entry.holdout_accuracy;
                best = result.network;
                result.best_epoch = epoch;
            }
        }
        result.log.push_back(entry);
        if (options.on_epoch) options.on_epoch(entry);
    }

    if (best_accuracy >= 0.0) {
        result.network = std::move(best);
    } else {
        result.best_epoch = config.epochs - 1;
    }
    return result;
}

} // namespace inkdk
