#include "inkdk/net.hpp"

#include "inkdk/error.hpp"
#include "inkdk/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace inkdk {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatRM>;
using MapConstMat = Eigen::Map<const MatRM>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using MapConstVec = Eigen::Map<const Eigen::VectorXd>;

std::vector<std::string_view> split_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t start = 0;
    while (true) {
        const std::size_t dash = text.find('-', start);
        tokens.push_back(text.substr(start, dash == std::string_view::npos ? std::string_view::npos : dash - start));
        if (dash == std::string_view::npos) break;
        start = dash + 1;
    }
    return tokens;
}

// Parses a whole token as a positive integer.
bool parse_positive(std::string_view s, int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && out > 0;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

} // namespace

std::size_t LayerSpec::fan_in() const noexcept {
    if (kind == LayerKind::conv)
        return static_cast<std::size_t>(in.c) * static_cast<std::size_t>(filter) * static_cast<std::size_t>(filter);
    return in.size();
}

std::string ArchSpec::to_string() const {
    std::string s = std::to_string(input.c) + "x" + std::to_string(input.h) + "x" + std::to_string(input.w);
    for (const LayerSpec& l : layers) {
        switch (l.kind) {
        case LayerKind::conv: s += "-" + std::to_string(l.units) + "C" + std::to_string(l.filter); break;
        case LayerKind::pool: s += "-MP2"; break;
        case LayerKind::full: s += "-" + std::to_string(l.units) + "N"; break;
        case LayerKind::output: s += "-" + std::to_string(l.units) + "Output"; break;
        }
    }
    return s;
}

std::vector<int> ArchSpec::spatial_trace() const {
    std::vector<int> trace{input.h};
    for (const LayerSpec& l : layers) {
        if (l.kind == LayerKind::conv || l.kind == LayerKind::pool) trace.push_back(l.out.h);
    }
    return trace;
}

int ArchSpec::weighted_layer_count() const noexcept {
    return static_cast<int>(std::count_if(layers.begin(), layers.end(), [](const LayerSpec& l) { return l.weighted(); }));
}

std::size_t ArchSpec::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const LayerSpec& l : layers) {
        if (l.weighted()) n += static_cast<std::size_t>(l.units) * (l.fan_in() + 1);
    }
    return n;
}

ArchSpec parse_arch(std::string_view text) {
    const std::vector<std::string_view> tokens = split_tokens(text);
    if (tokens.size() < 2) throw SyntaxError(std::string(text));

    ArchSpec spec;
    {
        const std::string_view head = tokens.front();
        const std::size_t x1 = head.find('x');
        const std::size_t x2 = x1 == std::string_view::npos ? x1 : head.find('x', x1 + 1);
        if (x2 == std::string_view::npos || !parse_positive(head.substr(0, x1), spec.input.c) ||
            !parse_positive(head.substr(x1 + 1, x2 - x1 - 1), spec.input.h) ||
            !parse_positive(head.substr(x2 + 1), spec.input.w))
            throw SyntaxError(std::string(head));
    }

    Shape cur = spec.input;
    bool flattened = false;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
        const std::string_view tok = tokens[t];
        const bool last = t + 1 == tokens.size();
        LayerSpec layer;
        layer.in = cur;
        if (ends_with(tok, "Output")) {
            if (!last || !parse_positive(tok.substr(0, tok.size() - 6), layer.units))
                throw SyntaxError(std::string(tok));
            layer.kind = LayerKind::output;
            cur = {layer.units, 1, 1};
        } else if (last) {
            throw SyntaxError(std::string(tok));
        } else if (tok == "MP2") {
            if (flattened) throw SyntaxError(std::string(tok));
            layer.kind = LayerKind::pool;
            cur = {cur.c, cur.h / 2, cur.w / 2};
            if (cur.h < 1 || cur.w < 1)
                throw ShapeError("pooling at layer " + std::to_string(t) + " drops the spatial size below 1");
        } else if (tok.size() > 1 && tok.back() == 'N') {
            if (!parse_positive(tok.substr(0, tok.size() - 1), layer.units)) throw SyntaxError(std::string(tok));
            layer.kind = LayerKind::full;
            cur = {layer.units, 1, 1};
            flattened = true;
        } else if (const std::size_t cpos = tok.find('C'); cpos != std::string_view::npos) {
            if (flattened || !parse_positive(tok.substr(0, cpos), layer.units) ||
                !parse_positive(tok.substr(cpos + 1), layer.filter))
                throw SyntaxError(std::string(tok));
            layer.kind = LayerKind::conv;
            cur = {layer.units, cur.h - layer.filter + 1, cur.w - layer.filter + 1};
            if (cur.h < 1 || cur.w < 1)
                throw ShapeError("convolution " + std::string(tok) + " does not fit its input");
        } else {
            throw SyntaxError(std::string(tok));
        }
        layer.out = cur;
        spec.layers.push_back(layer);
    }
    return spec;
}

std::string resolve_arch(std::string_view text, int channels, int classes) {
    std::string s(text);
    if (!s.empty() && s.front() == 'M') s = std::to_string(channels) + s.substr(1);
    if (ends_with(s, "-Output")) s = s.substr(0, s.size() - 6) + std::to_string(classes) + "Output";
    return s;
}

Network::Network(ArchSpec spec) : spec_(std::move(spec)) {
    std::size_t offset = 0;
    for (const LayerSpec& l : spec_.layers) {
        if (!l.weighted()) continue;
        ParamBlock b;
        b.weight_offset = offset;
        b.rows = static_cast<std::size_t>(l.units);
        b.cols = l.fan_in();
        b.bias_offset = offset + b.rows * b.cols;
        offset = b.bias_offset + b.rows;
        blocks_.push_back(b);
    }
    params_.assign(offset, 0.0);
    velocity_.assign(offset, 0.0);
}

Network Network::zeros(ArchSpec spec) { return Network(std::move(spec)); }

Network Network::init(ArchSpec spec, std::uint64_t seed) {
    Network net(std::move(spec));
    Rng rng(seed);
    for (const ParamBlock& b : net.blocks_) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(b.cols)));
        for (std::size_t i = 0; i < b.rows * b.cols; ++i) net.params_[b.weight_offset + i] = dist(rng);
    }
    return net;
}

void Network::set_parameters(std::span<const double> values) {
    if (values.size() != params_.size()) throw ShapeMismatch("parameter count does not match the architecture");
    std::copy(values.begin(), values.end(), params_.begin());
}

namespace {

// Activations of one sample, kept for the backward pass.
struct LayerState {
    AlignedVector input;  // layer input after dropout
    AlignedVector mask;   // dropout multipliers, empty when inactive
    AlignedVector col;    // im2col buffer (conv)
    AlignedVector output; // post-activation output
    std::vector<std::size_t> argmax;  // pool winners
};

void im2col(const Shape& in, int f, const Shape& out, const double* src, double* col) {
    const std::size_t hw = static_cast<std::size_t>(out.h) * out.w;
    for (int c = 0; c < in.c; ++c) {
        for (int ky = 0; ky < f; ++ky) {
            for (int kx = 0; kx < f; ++kx) {
                double* row = col + ((static_cast<std::size_t>(c) * f + ky) * f + kx) * hw;
                for (int y = 0; y < out.h; ++y) {
                    const double* s = src + (static_cast<std::size_t>(c) * in.h + y + ky) * in.w + kx;
                    std::copy(s, s + out.w, row + static_cast<std::size_t>(y) * out.w);
                }
            }
        }
    }
}

void col2im(const Shape& in, int f, const Shape& out, const double* col, double* dst) {
    const std::size_t hw = static_cast<std::size_t>(out.h) * out.w;
    std::fill(dst, dst + in.size(), 0.0);
    for (int c = 0; c < in.c; ++c) {
        for (int ky = 0; ky < f; ++ky) {
            for (int kx = 0; kx < f; ++kx) {
                const double* row = col + ((static_cast<std::size_t>(c) * f + ky) * f + kx) * hw;
                for (int y = 0; y < out.h; ++y) {
                    double* d = dst + (static_cast<std::size_t>(c) * in.h + y + ky) * in.w + kx;
                    const double* r = row + static_cast<std::size_t>(y) * out.w;
                    for (int x = 0; x < out.w; ++x) d[x] += r[x];
                }
            }
        }
    }
}

class Evaluator {
public:
    explicit Evaluator(const Network& net) : net_(net), states_(net.spec().layers.size()) {}

    // Runs the forward pass and returns the softmax output.
    const AlignedVector& run(std::span<const double> input, const ForwardOptions& opt) {
        const ArchSpec& spec = net_.spec();
        if (input.size() != spec.input.size()) throw ShapeMismatch("input size does not match the architecture");
        const std::span<const double> params = net_.parameters();

        Rng rng(opt.seed);
        AlignedVector current(input.begin(), input.end());
        int weighted = 0;
        for (std::size_t li = 0; li < spec.layers.size(); ++li) {
            const LayerSpec& l = spec.layers[li];
            LayerState& st = states_[li];
            st.input = std::move(current);
            st.mask.clear();
            if (l.weighted()) {
                const double rate = opt.train && static_cast<std::size_t>(weighted) < opt.dropout.size()
                                        ? opt.dropout[static_cast<std::size_t>(weighted)]
                                        : 0.0;
                if (rate > 0.0) {
                    st.mask.resize(st.input.size());
                    const double keep = 1.0 / (1.0 - rate);
                    for (std::size_t i = 0; i < st.input.size(); ++i) {
                        st.mask[i] = uniform(rng, 0.0, 1.0) < rate ? 0.0 : keep;
                        st.input[i] *= st.mask[i];
                    }
                }
            }

            switch (l.kind) {
            case LayerKind::conv: {
                const ParamBlock& b = net_.blocks()[static_cast<std::size_t>(weighted++)];
                const std::size_t hw = static_cast<std::size_t>(l.out.h) * l.out.w;
                st.col.resize(b.cols * hw);
                im2col(l.in, l.filter, l.out, st.input.data(), st.col.data());
                st.output.resize(b.rows * hw);
                MapMat out(st.output.data(), static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(hw));
                out.noalias() = MapConstMat(params.data() + b.weight_offset, static_cast<Eigen::Index>(b.rows),
                                            static_cast<Eigen::Index>(b.cols)) *
                                MapConstMat(st.col.data(), static_cast<Eigen::Index>(b.cols),
                                            static_cast<Eigen::Index>(hw));
                out.colwise() += MapConstVec(params.data() + b.bias_offset, static_cast<Eigen::Index>(b.rows));
                for (double& v : st.output) v = std::max(v, 0.0);
                break;
            }
            case LayerKind::pool: {
                st.output.assign(l.out.size(), 0.0);
                st.argmax.assign(l.out.size(), 0);
                for (int c = 0; c < l.out.c; ++c) {
                    for (int y = 0; y < l.out.h; ++y) {
                        for (int x = 0; x < l.out.w; ++x) {
                            std::size_t best = (static_cast<std::size_t>(c) * l.in.h + 2 * y) * l.in.w + 2 * x;
                            for (int dy = 0; dy < 2; ++dy) {
                                for (int dx = 0; dx < 2; ++dx) {
                                    const std::size_t idx =
                                        (static_cast<std::size_t>(c) * l.in.h + 2 * y + dy) * l.in.w + 2 * x + dx;
                                    if (st.input[idx] > st.input[best]) best = idx;
                                }
                            }
                            const std::size_t o = (static_cast<std::size_t>(c) * l.out.h + y) * l.out.w + x;
                            st.output[o] = st.input[best];
                            st.argmax[o] = best;
                        }
                    }
                }
                break;
            }
            case LayerKind::full:
            case LayerKind::output: {
                const ParamBlock& b = net_.blocks()[static_cast<std::size_t>(weighted++)];
                st.output.resize(b.rows);
                MapVec out(st.output.data(), static_cast<Eigen::Index>(b.rows));
                out.noalias() = MapConstMat(params.data() + b.weight_offset, static_cast<Eigen::Index>(b.rows),
                                            static_cast<Eigen::Index>(b.cols)) *
                                MapConstVec(st.input.data(), static_cast<Eigen::Index>(b.cols));
                out += MapConstVec(params.data() + b.bias_offset, static_cast<Eigen::Index>(b.rows));
                if (l.kind == LayerKind::full) {
                    for (double& v : st.output) v = std::max(v, 0.0);
                } else {
                    const double mx = *std::max_element(st.output.begin(), st.output.end());
                    double sum = 0.0;
                    for (double& v : st.output) {
                        v = std::exp(v - mx);
                        sum += v;
                    }
                    for (double& v : st.output) v /= sum;
                }
                break;
            }
            }
            current = st.output;
        }
        return states_.back().output;
    }

    // Accumulates weight * d(-log p[label]) into grad after run().
    void backward(int label, double weight, std::span<double> grad) {
        const ArchSpec& spec = net_.spec();
        const std::span<const double> params = net_.parameters();

        AlignedVector delta = states_.back().output;
        delta[static_cast<std::size_t>(label)] -= 1.0;
        for (double& d : delta) d *= weight;

        int weighted = spec.weighted_layer_count();
        for (std::size_t li = spec.layers.size(); li-- > 0;) {
            const LayerSpec& l = spec.layers[li];
            LayerState& st = states_[li];
            const bool need_input_grad = li > 0;
            AlignedVector din;

            switch (l.kind) {
            case LayerKind::output:
            case LayerKind::full: {
                const ParamBlock& b = net_.blocks()[static_cast<std::size_t>(--weighted)];
                if (l.kind == LayerKind::full) {
                    for (std::size_t i = 0; i < delta.size(); ++i)
                        if (st.output[i] <= 0.0) delta[i] = 0.0;
                }
                const auto rows = static_cast<Eigen::Index>(b.rows);
                const auto cols = static_cast<Eigen::Index>(b.cols);
                MapConstVec dz(delta.data(), rows);
                MapConstVec x(st.input.data(), cols);
                MapMat(grad.data() + b.weight_offset, rows, cols).noalias() += dz * x.transpose();
                MapVec(grad.data() + b.bias_offset, rows) += dz;
                if (need_input_grad) {
                    din.resize(b.cols);
                    MapVec(din.data(), cols).noalias() =
                        MapConstMat(params.data() + b.weight_offset, rows, cols).transpose() * dz;
                }
                break;
            }
            case LayerKind::conv: {
                const ParamBlock& b = net_.blocks()[static_cast<std::size_t>(--weighted)];
                for (std::size_t i = 0; i < delta.size(); ++i)
                    if (st.output[i] <= 0.0) delta[i] = 0.0;
                const auto rows = static_cast<Eigen::Index>(b.rows);
                const auto cols = static_cast<Eigen::Index>(b.cols);
                const auto hw = static_cast<Eigen::Index>(static_cast<std::size_t>(l.out.h) * l.out.w);
                MapConstMat dz(delta.data(), rows, hw);
                MapConstMat col(st.col.data(), cols, hw);
                MapMat(grad.data() + b.weight_offset, rows, cols).noalias() += dz * col.transpose();
                MapVec(grad.data() + b.bias_offset, rows) += dz.rowwise().sum();
                if (need_input_grad) {
                    AlignedVector dcol(b.cols * static_cast<std::size_t>(hw));
                    MapMat(dcol.data(), cols, hw).noalias() =
                        MapConstMat(params.data() + b.weight_offset, rows, cols).transpose() * dz;
                    din.resize(l.in.size());
                    col2im(l.in, l.filter, l.out, dcol.data(), din.data());
                }
                break;
            }
            case LayerKind::pool: {
                din.assign(l.in.size(), 0.0);
                for (std::size_t o = 0; o < delta.size(); ++o) din[st.argmax[o]] += delta[o];
                break;
            }
            }

            if (!need_input_grad) break;
            if (!st.mask.empty()) {
                for (std::size_t i = 0; i < din.size(); ++i) din[i] *= st.mask[i];
            }
            delta = std::move(din);
        }
    }

private:
    const Network& net_;
    std::vector<LayerState> states_;
};

AlignedVector standardized_input(const Network& net, const FeatureTensor& x) {
    const Shape& in = net.spec().input;
    if (x.channels() != in.c || x.height() != in.h || x.width() != in.w)
        throw ShapeMismatch("tensor " + std::to_string(x.channels()) + "x" + std::to_string(x.height()) + "x" +
                            std::to_string(x.width()) + " does not match network input " + net.spec().to_string());
    AlignedVector v(x.data().size());
    const std::size_t plane = x.plane_size();
    for (int c = 0; c < x.channels(); ++c) {
        const double s = x.scales()[static_cast<std::size_t>(c)];
        const auto ch = x.channel(c);
        for (std::size_t i = 0; i < plane; ++i) v[static_cast<std::size_t>(c) * plane + i] = ch[i] * s;
    }
    return v;
}

} // namespace

std::vector<double> forward(const Network& net, std::span<const double> input, const ForwardOptions& options) {
    Evaluator ev(net);
    const AlignedVector& probs = ev.run(input, options);
    return {probs.begin(), probs.end()};
}

std::vector<double> forward(const Network& net, const FeatureTensor& x, const ForwardOptions& options) {
    const AlignedVector v = standardized_input(net, x);
    return forward(net, std::span<const double>(v), options);
}

double loss_and_gradient(const Network& net, std::span<const LabeledTensor> batch, const ForwardOptions& options,
                         std::vector<double>& gradient) {
    if (batch.empty()) throw InvalidArgument("empty batch");
    AlignedVector grad(net.parameter_count(), 0.0);
    Evaluator ev(net);
    const double weight = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const LabeledTensor& s = batch[i];
        if (s.label < 0 || s.label >= net.spec().classes()) throw ShapeMismatch("label outside the class range");
        ForwardOptions opt = options;
        opt.seed = derive_seed(options.seed, "dropout", i);
        const AlignedVector input = standardized_input(net, s.tensor);
        const AlignedVector& probs = ev.run(input, opt);
        loss -= std::log(std::max(probs[static_cast<std::size_t>(s.label)], 1e-300));
        ev.backward(s.label, weight, grad);
    }
    gradient.assign(grad.begin(), grad.end());
    return loss * weight;
}

void TrainConfig::validate(const ArchSpec& spec) const {
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must lie in (0, 1]");
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (dropout.size() != static_cast<std::size_t>(spec.weighted_layer_count()))
        throw ConfigError("dropout list has " + std::to_string(dropout.size()) + " entries but the architecture has " +
                          std::to_string(spec.weighted_layer_count()) + " weighted layers");
    for (double r : dropout) {
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
    }
}

double train_step(Network& net, std::span<const LabeledTensor> batch, const TrainConfig& config, std::uint64_t seed) {
    ForwardOptions opt;
    opt.train = true;
    opt.seed = seed;
    opt.dropout = config.dropout;
    std::vector<double> grad;
    const double loss = loss_and_gradient(net, batch, opt, grad);

    std::span<double> w = net.parameters();
    std::span<double> v = net.velocity();
    for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = config.momentum * v[i] + grad[i];
        w[i] -= config.learning_rate * v[i];
    }
    return loss;
}

GradCheckResult grad_check(const ArchSpec& spec, std::uint64_t seed, const GradCheckOptions& options) {
    if (spec.parameter_count() > 10000) throw InvalidArgument("gradient check is meant for toy networks");
    Network net = Network::init(spec, derive_seed(seed, "gradcheck-init"));
    Rng rng(derive_seed(seed, "gradcheck-data"));

    for (const ParamBlock& b : net.blocks()) {
        for (std::size_t i = 0; i < b.rows; ++i) net.parameters()[b.bias_offset + i] = uniform(rng, -0.1, 0.1);
    }

    std::vector<std::string> labels;
    for (int c = 0; c < spec.input.c; ++c) labels.push_back("c" + std::to_string(c));
    std::vector<LabeledTensor> batch;
    for (int i = 0; i < options.batch; ++i) {
        LabeledTensor s{FeatureTensor(spec.input.c, spec.input.h, spec.input.w, labels), 0};
        if (!options.zero_input) {
            for (float& v : s.tensor.data()) v = static_cast<float>(uniform(rng, -1.0, 1.0));
        }
        s.label = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.classes()));
        batch.push_back(std::move(s));
    }

    ForwardOptions opt;
    std::vector<double> analytic;
    loss_and_gradient(net, batch, opt, analytic);

    std::vector<std::size_t> indices(net.parameter_count());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (indices.size() > static_cast<std::size_t>(options.samples)) {
        std::shuffle(indices.begin(), indices.end(), rng);
        indices.resize(static_cast<std::size_t>(options.samples));
    }

    GradCheckResult result;
    std::vector<double> scratch;
    for (std::size_t idx : indices) {
        double& w = net.parameters()[idx];
        const double saved = w;
        w = saved + options.step;
        const double plus = loss_and_gradient(net, batch, opt, scratch);
        w = saved - options.step;
        const double minus = loss_and_gradient(net, batch, opt, scratch);
        w = saved;
        const double numeric = (plus - minus) / (2.0 * options.step);
        const double a = analytic[idx] * (1.0 + options.fault);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
        ++result.checked;
    }
    return result;
}

} // namespace inkdk
