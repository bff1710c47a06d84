#pragma once

#include "inkdk/ink.hpp"
#include "inkdk/net.hpp"
#include "inkdk/raster.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace inkdk {

/// Labelled samples plus the distinct labels in first-seen order.
class Dataset {
public:
    Dataset() = default;
    /// Every sample must carry a label; throws InvalidInk otherwise.
    explicit Dataset(std::vector<Ink> samples);

    const std::vector<Ink>& samples() const noexcept { return samples_; }
    const std::vector<std::string>& class_table() const noexcept { return class_table_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    /// Index of a label in the class table, or -1.
    int class_index(const std::string& label) const noexcept;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<Ink> samples_;
    std::vector<std::string> class_table_;
};

/// POT records, little-endian:
///   u16 sample_size (whole record), u8[4] tag (2-byte code + 2 zero bytes),
///   u16 stroke_count, then per stroke i16 (x, y) pairs closed by (-1, 0),
///   and the record closed by (-1, -1).
/// Tags become four lowercase hex digits of the two code bytes in file order
/// ("b0a1"). Throws MalformedRecord on any layout violation.
Dataset parse_pot(std::span<const std::uint8_t> bytes);

/// Inverse of parse_pot. Throws UnrepresentableValue for non-integral or
/// out-of-range coordinates, points that would read back as terminators,
/// imaginary strokes, labels that are not four hex digits, or records
/// larger than 65535 bytes.
std::vector<std::uint8_t> write_pot(const Dataset& dataset);

/// One JSON object per line:
///   {"label": "...", "strokes": [{"kind": "real", "points": [[x, y], ...]}]}
/// Throws ParseError(line, reason).
Dataset read_inkjson(const std::filesystem::path& path);
void write_inkjson(const std::filesystem::path& path, const Dataset& dataset);
/// String forms of the same format.
Dataset parse_inkjson(const std::string& text);
std::string format_inkjson(const Dataset& dataset);

struct SynthConfig {
    int num_classes = 10;
    int samples_per_class = 20;
    double jitter_scale = 0.03;  // fraction of the glyph box
    std::uint64_t seed = 1;

    void validate() const;

    friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Version of the glyph template grammar; bump when templates change.
inline constexpr int synth_grammar_version = 1;

/// Seeded glyph templates (2-6 strokes of line, hook and box primitives) on
/// a 1000-unit integer canvas. Instances first_instance .. first_instance +
/// samples_per_class - 1 of every class are emitted, class-major, so a
/// disjoint test split of the same classes is synth_dataset(cfg, n).
/// Labels are four hex digits, so the output is POT-representable.
Dataset synth_dataset(const SynthConfig& config, int first_instance = 0);

/// The noise-free template of every class, in label order.
std::vector<Ink> synth_templates(const SynthConfig& config);

/// Tensor file: "IKF1", u16 version, u32 C, H, W, then per channel a u16
/// label length and label bytes, C f32 scales, and C*H*W f32 values, all
/// little-endian. Throws FormatError on bad magic, version or dimensions.
std::vector<std::uint8_t> encode_tensor(const FeatureTensor& tensor);
FeatureTensor decode_tensor(std::span<const std::uint8_t> bytes);
void save_tensor(const std::filesystem::path& path, const FeatureTensor& tensor);
FeatureTensor load_tensor(const std::filesystem::path& path);

/// Weights file: "IKW1", u16 version, u32-prefixed architecture string,
/// u32-prefixed metadata string (JSON, may be empty), u64 parameter count
/// and the f64 parameters.
struct WeightsFile {
    Network network;
    std::string metadata;
};
std::vector<std::uint8_t> encode_weights(const Network& network, const std::string& metadata = {});
WeightsFile decode_weights(std::span<const std::uint8_t> bytes);
void save_weights(const std::filesystem::path& path, const Network& network, const std::string& metadata = {});
WeightsFile load_weights(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace inkdk
