#pragma once

#include "inkdk/raster.hpp"

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace inkdk {

/// Allocator returning 64-byte aligned blocks.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept { return true; }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

struct Shape {
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t size() const noexcept {
        return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    friend bool operator==(const Shape&, const Shape&) = default;
};

enum class LayerKind { conv, pool, full, output };

struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    int units = 0;   // filters (conv), neurons (full), classes (output)
    int filter = 0;  // conv kernel size
    Shape in;
    Shape out;

    bool weighted() const noexcept { return kind != LayerKind::pool; }
    /// Inputs feeding one unit: C*f*f for convolutions, in.size() otherwise.
    std::size_t fan_in() const noexcept;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Parsed layer plan such as "1x8x8-2C3-MP2-4N-2Output".
///
/// `layers` ends with the softmax output layer. Convolutions use stride 1
/// and no padding; pooling is 2x2 with stride 2 and floors odd sizes.
struct ArchSpec {
    Shape input;
    std::vector<LayerSpec> layers;

    int classes() const noexcept { return layers.back().units; }
    /// Canonical string; parse_arch(to_string()) reproduces the spec.
    std::string to_string() const;
    /// Spatial side after each layer, starting with the input side.
    std::vector<int> spatial_trace() const;
    /// Convolutions, fully connected layers, then the output layer.
    int weighted_layer_count() const noexcept;
    std::size_t parameter_count() const noexcept;

    friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

/// Throws SyntaxError on a malformed token and ShapeError when a spatial
/// size would drop below 1.
ArchSpec parse_arch(std::string_view text);

/// Substitutes a leading "M" channel placeholder and a bare "Output" token
/// ("...-512N-Output") with concrete values. Explicit values are kept.
std::string resolve_arch(std::string_view text, int channels, int classes);

/// Where a weighted layer's parameters live inside the flat store.
struct ParamBlock {
    std::size_t weight_offset = 0;
    std::size_t rows = 0;  // output units
    std::size_t cols = 0;  // fan-in
    std::size_t bias_offset = 0;

    friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Parameters are one flat array: for each weighted layer a row-major
/// rows x cols weight matrix followed by its bias vector.
class Network {
public:
    /// Fan-in scaled normal weights (variance 2 / fan_in) and zero biases.
    static Network init(ArchSpec spec, std::uint64_t seed);
    static Network zeros(ArchSpec spec);

    const ArchSpec& spec() const noexcept { return spec_; }
    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }
    std::span<double> velocity() noexcept { return velocity_; }
    /// One block per weighted layer, in weighted-layer order.
    const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    /// Replaces every parameter; throws ShapeMismatch on a size mismatch.
    void set_parameters(std::span<const double> values);

    friend bool operator==(const Network&, const Network&) = default;

private:
    explicit Network(ArchSpec spec);

    ArchSpec spec_;
    std::vector<ParamBlock> blocks_;
    AlignedVector params_;
    AlignedVector velocity_;
};

struct LabeledTensor {
    FeatureTensor tensor;
    int label = 0;
};

struct ForwardOptions {
    bool train = false;
    std::uint64_t seed = 0;
    /// Inverted-dropout rate per weighted layer input (train mode only).
    std::span<const double> dropout;
};

/// Softmax class probabilities. The tensor's channel scales are applied to
/// its data on the way in. Throws ShapeMismatch on an input shape mismatch.
std::vector<double> forward(const Network& net, const FeatureTensor& x, const ForwardOptions& options = {});

/// Same, for an already standardized input laid out C x H x W.
std::vector<double> forward(const Network& net, std::span<const double> input,
                            const ForwardOptions& options = {});

/// Mean softmax cross-entropy over the batch and its gradient (resized to
/// parameter_count()). Sample i uses dropout seed derive(seed, i).
double loss_and_gradient(const Network& net, std::span<const LabeledTensor> batch,
                         const ForwardOptions& options, std::vector<double>& gradient);

struct TrainConfig {
    int batch_size = 96;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double lr_decay = 0.95;  // per epoch
    std::vector<double> dropout;
    int epochs = 10;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless the dropout list has one rate in [0,1) per
    /// weighted layer of the architecture and the scalars are in range.
    void validate(const ArchSpec& spec) const;
};

/// One momentum-SGD step (v = mu v + g; w -= lr v) on the mean
/// cross-entropy. Returns the loss measured before the update.
double train_step(Network& net, std::span<const LabeledTensor> batch, const TrainConfig& config,
                  std::uint64_t seed);

struct GradCheckOptions {
    int samples = 50;
    double step = 1e-5;
    int batch = 2;
    /// All-zero inputs instead of random ones.
    bool zero_input = false;
    /// Relative error injected into the analytic gradient; a harness check.
    double fault = 0.0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    int checked = 0;
};

/// Compares the analytic gradient with central differences on randomly
/// sampled parameters of a freshly initialized toy network. Relative errors
/// use max(|analytic|, |numeric|, 1e-6) as the denominator.
GradCheckResult grad_check(const ArchSpec& spec, std::uint64_t seed, const GradCheckOptions& options = {});

} // namespace inkdk
