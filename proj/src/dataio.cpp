#include "inkdk/dataio.hpp"

#include "inkdk/error.hpp"
#include "inkdk/nln.hpp"
#include "inkdk/rng.hpp"

#include "bytes.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace inkdk {

using nlohmann::json;

Dataset::Dataset(std::vector<Ink> samples) : samples_(std::move(samples)) {
    for (const Ink& ink : samples_) {
        if (!ink.label()) throw InvalidInk("dataset sample has no label");
        if (class_index(*ink.label()) < 0) class_table_.push_back(*ink.label());
    }
}

int Dataset::class_index(const std::string& label) const noexcept {
    const auto it = std::find(class_table_.begin(), class_table_.end(), label);
    return it == class_table_.end() ? -1 : static_cast<int>(it - class_table_.begin());
}

namespace {

std::string hex_label(std::uint8_t a, std::uint8_t b) {
    char buf[5];
    std::snprintf(buf, sizeof buf, "%02x%02x", a, b);
    return buf;
}

bool parse_hex_label(const std::string& label, std::uint8_t& a, std::uint8_t& b) {
    if (label.size() != 4) return false;
    for (char c : label) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    a = static_cast<std::uint8_t>(std::stoul(label.substr(0, 2), nullptr, 16));
    b = static_cast<std::uint8_t>(std::stoul(label.substr(2, 2), nullptr, 16));
    return true;
}

std::int16_t pot_coordinate(double v) {
    if (!(v == std::floor(v)) || v < -32768.0 || v > 32767.0)
        throw UnrepresentableValue("coordinate " + std::to_string(v) + " is not a signed 16-bit integer");
    return static_cast<std::int16_t>(v);
}

} // namespace

Dataset parse_pot(std::span<const std::uint8_t> bytes) {
    const auto fail = [](std::size_t offset, const std::string& reason) { throw MalformedRecord(offset, reason); };
    ByteReader reader(bytes, fail);
    std::vector<Ink> samples;
    while (reader.remaining() > 0) {
        const std::size_t start = reader.pos();
        const std::size_t size = reader.u16();
        if (size < 12) fail(start, "record size " + std::to_string(size) + " is too small");
        if (size > bytes.size() - start) fail(start, "record size runs past the end of input");
        const std::size_t end = start + size;
        ByteReader rec(bytes.first(end), fail);
        rec.seek(start + 2);

        const std::uint8_t t0 = static_cast<std::uint8_t>(rec.uint(1));
        const std::uint8_t t1 = static_cast<std::uint8_t>(rec.uint(1));
        if (rec.u16() != 0) fail(start + 4, "tag padding bytes are not zero");
        const std::size_t stroke_count = rec.u16();
        if (stroke_count == 0) fail(start + 6, "record declares no strokes");

        std::vector<Stroke> strokes;
        std::vector<Point> current;
        while (true) {
            const std::size_t at = rec.pos();
            const std::int16_t x = rec.i16();
            const std::int16_t y = rec.i16();
            if (x == -1 && y == -1) {
                if (!current.empty()) fail(at, "record ends inside an unterminated stroke");
                if (strokes.size() != stroke_count)
                    fail(at, "record declares " + std::to_string(stroke_count) + " strokes but contains " +
                                 std::to_string(strokes.size()));
                if (rec.pos() != end) fail(rec.pos(), "bytes after record terminator");
                break;
            }
            if (x == -1 && y == 0) {
                if (current.empty()) fail(at, "empty stroke");
                if (strokes.size() == stroke_count) fail(at, "more strokes than declared");
                strokes.emplace_back(std::move(current));
                current.clear();
                continue;
            }
            current.push_back({static_cast<double>(x), static_cast<double>(y)});
        }
        samples.emplace_back(std::move(strokes), hex_label(t0, t1));
        reader.seek(end);
    }
    return Dataset(std::move(samples));
}

std::vector<std::uint8_t> write_pot(const Dataset& dataset) {
    ByteWriter out;
    for (const Ink& ink : dataset.samples()) {
        std::uint8_t t0 = 0;
        std::uint8_t t1 = 0;
        if (!parse_hex_label(*ink.label(), t0, t1))
            throw UnrepresentableValue("label '" + *ink.label() + "' is not a 2-byte hex tag code");

        ByteWriter rec;
        rec.u16(0);
        rec.u8(t0);
        rec.u8(t1);
        rec.u16(0);
        if (ink.strokes().size() > 0xffff) throw UnrepresentableValue("too many strokes for a POT record");
        rec.u16(static_cast<std::uint16_t>(ink.strokes().size()));
        for (const Stroke& s : ink.strokes()) {
            if (!s.is_real()) throw UnrepresentableValue("POT records hold real strokes only");
            for (const Point& p : s.points()) {
                const std::int16_t x = pot_coordinate(p.x);
                const std::int16_t y = pot_coordinate(p.y);
                if (x == -1 && (y == 0 || y == -1))
                    throw UnrepresentableValue("point collides with a POT terminator");
                rec.i16(x);
                rec.i16(y);
            }
            rec.i16(-1);
            rec.i16(0);
        }
        rec.i16(-1);
        rec.i16(-1);
        if (rec.size() > 0xffff) throw UnrepresentableValue("record exceeds 65535 bytes");
        const auto size = static_cast<std::uint16_t>(rec.size());
        rec.buffer()[0] = static_cast<std::uint8_t>(size & 0xff);
        rec.buffer()[1] = static_cast<std::uint8_t>(size >> 8);
        out.buffer().insert(out.buffer().end(), rec.buffer().begin(), rec.buffer().end());
    }
    return std::move(out.buffer());
}

namespace {

Ink ink_from_json(const json& j, std::size_t line) {
    const auto fail = [line](const std::string& reason) { throw ParseError(line, reason); };
    if (!j.is_object()) fail("sample is not a JSON object");
    if (!j.contains("label") || !j["label"].is_string()) fail("missing string \"label\"");
    if (!j.contains("strokes") || !j["strokes"].is_array()) fail("missing array \"strokes\"");

    std::vector<Stroke> strokes;
    for (const json& js : j["strokes"]) {
        if (!js.is_object() || !js.contains("points") || !js["points"].is_array())
            fail("stroke without a \"points\" array");
        StrokeKind kind = StrokeKind::real;
        if (js.contains("kind")) {
            const json& k = js["kind"];
            if (k == "real") {
                kind = StrokeKind::real;
            } else if (k == "imaginary") {
                kind = StrokeKind::imaginary;
            } else {
                fail("stroke kind must be \"real\" or \"imaginary\"");
            }
        }
        std::vector<Point> pts;
        for (const json& jp : js["points"]) {
            if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number() || !jp[1].is_number())
                fail("point is not an [x, y] pair");
            pts.push_back({jp[0].get<double>(), jp[1].get<double>()});
        }
        try {
            strokes.emplace_back(std::move(pts), kind);
        } catch (const InvalidInk& e) {
            fail(e.what());
        }
    }
    try {
        return Ink(std::move(strokes), j["label"].get<std::string>());
    } catch (const InvalidInk& e) {
        throw ParseError(line, e.what());
    }
}

json ink_to_json(const Ink& ink) {
    json strokes = json::array();
    for (const Stroke& s : ink.strokes()) {
        json pts = json::array();
        for (const Point& p : s.points()) pts.push_back({p.x, p.y});
        strokes.push_back({{"kind", to_string(s.kind())}, {"points", std::move(pts)}});
    }
    return {{"label", ink.label().value_or("")}, {"strokes", std::move(strokes)}};
}

} // namespace

Dataset parse_inkjson(const std::string& text) {
    std::vector<Ink> samples;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(number, e.what());
        }
        samples.push_back(ink_from_json(j, number));
    }
    return Dataset(std::move(samples));
}

std::string format_inkjson(const Dataset& dataset) {
    std::string out;
    for (const Ink& ink : dataset.samples()) {
        out += ink_to_json(ink).dump();
        out += '\n';
    }
    return out;
}

Dataset read_inkjson(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    return parse_inkjson(std::string(bytes.begin(), bytes.end()));
}

void write_inkjson(const std::filesystem::path& path, const Dataset& dataset) {
    const std::string text = format_inkjson(dataset);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void SynthConfig::validate() const {
    if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
    if (num_classes > 0xffff) throw ConfigError("num_classes exceeds the 2-byte label space");
    if (samples_per_class < 1) throw ConfigError("samples_per_class must be positive");
    if (!(jitter_scale >= 0.0) || !std::isfinite(jitter_scale)) throw ConfigError("jitter_scale must be >= 0");
}

namespace {

constexpr int lattice_steps = 6;
constexpr double canvas_units = 1000.0;

Point lattice_point(Rng& rng) {
    const auto coord = [&] {
        return 0.1 + 0.8 * static_cast<double>(rng() % (lattice_steps + 1)) / lattice_steps;
    };
    const double x = coord();
    return {x, coord()};
}

Stroke line_primitive(Rng& rng) {
    while (true) {
        const Point a = lattice_point(rng);
        const Point b = lattice_point(rng);
        if (std::hypot(b.x - a.x, b.y - a.y) >= 0.25) return Stroke({a, b});
    }
}

Stroke hook_primitive(Rng& rng) {
    const Stroke line = line_primitive(rng);
    const Point a = line.points()[0];
    const Point b = line.points()[1];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const double side = (rng() % 2 == 0) ? 1.0 : -1.0;
    // Tail bent back at roughly 135 degrees from the main stroke.
    const double ux = (b.x - a.x) / len;
    const double uy = (b.y - a.y) / len;
    const double tx = -ux * 0.7071 + side * -uy * 0.7071;
    const double ty = -uy * 0.7071 + side * ux * 0.7071;
    const Point c{std::clamp(b.x + 0.15 * tx, 0.0, 1.0), std::clamp(b.y + 0.15 * ty, 0.0, 1.0)};
    return Stroke({a, b, c});
}

Stroke box_primitive(Rng& rng) {
    while (true) {
        const Point a = lattice_point(rng);
        const Point b = lattice_point(rng);
        if (std::abs(b.x - a.x) < 0.25 || std::abs(b.y - a.y) < 0.25) continue;
        std::vector<Point> pts{a, {b.x, a.y}, b, {a.x, b.y}};
        if (rng() % 2 == 0) pts.push_back(a);
        return Stroke(std::move(pts));
    }
}

Ink random_template(Rng& rng) {
    const int strokes = 2 + static_cast<int>(rng() % 5);
    std::vector<Stroke> out;
    for (int s = 0; s < strokes; ++s) {
        const std::uint64_t pick = rng() % 4;
        if (pick < 2) {
            out.push_back(line_primitive(rng));
        } else if (pick == 2) {
            out.push_back(hook_primitive(rng));
        } else {
            out.push_back(box_primitive(rng));
        }
    }
    return Ink(std::move(out));
}

std::string synth_label(int cls) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%04x", cls);
    return buf;
}

int bitmap_distance(const BinaryGrid& a, const BinaryGrid& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) d += a.cells[i] != b.cells[i];
    return d;
}

} // namespace

std::vector<Ink> synth_templates(const SynthConfig& config) {
    config.validate();
    constexpr int grid = 12;
    constexpr int min_distance = 10;
    std::vector<Ink> templates;
    std::vector<BinaryGrid> bitmaps;
    for (int c = 0; c < config.num_classes; ++c) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            Rng rng(derive_seed(config.seed, "synth-template", static_cast<std::uint64_t>(c), attempt));
            Ink t = random_template(rng);
            BinaryGrid bm = rasterize_binary(normalize_to_box(t), grid);
            const bool distinct = std::all_of(bitmaps.begin(), bitmaps.end(), [&](const BinaryGrid& other) {
                return bitmap_distance(bm, other) >= min_distance;
            });
            if (distinct || attempt >= 10000) {
                templates.push_back(t.with_label(synth_label(c)));
                bitmaps.push_back(std::move(bm));
                break;
            }
        }
    }
    return templates;
}

Dataset synth_dataset(const SynthConfig& config, int first_instance) {
    const std::vector<Ink> templates = synth_templates(config);
    std::vector<Ink> samples;
    samples.reserve(templates.size() * static_cast<std::size_t>(config.samples_per_class));
    for (std::size_t c = 0; c < templates.size(); ++c) {
        for (int i = 0; i < config.samples_per_class; ++i) {
            const auto instance = static_cast<std::uint64_t>(first_instance + i);
            Rng rng(derive_seed(config.seed, "synth-instance", c, instance));
            const Ink sample = transform_points(templates[c], [&](Point p) {
                const double x = p.x + config.jitter_scale * uniform(rng, -1.0, 1.0);
                const double y = p.y + config.jitter_scale * uniform(rng, -1.0, 1.0);
                return Point{std::round(std::clamp(x, 0.0, 1.0) * canvas_units),
                             std::round(std::clamp(y, 0.0, 1.0) * canvas_units)};
            });
            samples.push_back(sample);
        }
    }
    return Dataset(std::move(samples));
}

namespace {

constexpr std::uint16_t tensor_version = 1;
constexpr std::uint16_t weights_version = 1;

} // namespace

std::vector<std::uint8_t> encode_tensor(const FeatureTensor& tensor) {
    if (tensor.channels() < 1) throw FormatError("tensor needs at least one channel");
    ByteWriter w;
    w.bytes("IKF1");
    w.u16(tensor_version);
    w.u32(static_cast<std::uint32_t>(tensor.channels()));
    w.u32(static_cast<std::uint32_t>(tensor.height()));
    w.u32(static_cast<std::uint32_t>(tensor.width()));
    for (const std::string& label : tensor.labels()) {
        if (label.size() > 0xffff) throw FormatError("channel label too long");
        w.u16(static_cast<std::uint16_t>(label.size()));
        w.bytes(label);
    }
    for (float s : tensor.scales()) w.f32(s);
    for (float v : tensor.data()) w.f32(v);
    return std::move(w.buffer());
}

FeatureTensor decode_tensor(std::span<const std::uint8_t> bytes) {
    const auto fail = [](std::size_t offset, const std::string& reason) {
        throw FormatError(reason + " at byte " + std::to_string(offset));
    };
    ByteReader r(bytes, fail);
    if (r.remaining() < 4 || r.str(4) != "IKF1") throw FormatError("bad tensor magic");
    if (r.u16() != tensor_version) throw FormatError("unsupported tensor version");
    const std::uint32_t c = r.u32();
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    if (c < 1 || h < 1 || w < 1) throw FormatError("tensor dimensions must be positive");
    const std::uint64_t count = static_cast<std::uint64_t>(c) * h * w;
    if (count > r.remaining() / 4) throw FormatError("tensor payload is truncated");
    std::vector<std::string> labels;
    for (std::uint32_t i = 0; i < c; ++i) labels.push_back(r.str(r.u16()));
    FeatureTensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w), std::move(labels));
    std::vector<float> scales(c);
    for (float& s : scales) s = r.f32();
    t.set_scales(std::move(scales));
    if (r.remaining() != count * 4) throw FormatError("tensor payload size does not match dimensions");
    for (float& v : t.data()) v = r.f32();
    return t;
}

void save_tensor(const std::filesystem::path& path, const FeatureTensor& tensor) {
    write_file(path, encode_tensor(tensor));
}

FeatureTensor load_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

std::vector<std::uint8_t> encode_weights(const Network& network, const std::string& metadata) {
    ByteWriter w;
    w.bytes("IKW1");
    w.u16(weights_version);
    const std::string arch = network.spec().to_string();
    w.u32(static_cast<std::uint32_t>(arch.size()));
    w.bytes(arch);
    w.u32(static_cast<std::uint32_t>(metadata.size()));
    w.bytes(metadata);
    w.u64(network.parameter_count());
    for (double v : network.parameters()) w.f64(v);
    return std::move(w.buffer());
}

WeightsFile decode_weights(std::span<const std::uint8_t> bytes) {
    const auto fail = [](std::size_t offset, const std::string& reason) {
        throw FormatError(reason + " at byte " + std::to_string(offset));
    };
    ByteReader r(bytes, fail);
    if (r.remaining() < 4 || r.str(4) != "IKW1") throw FormatError("bad weights magic");
    if (r.u16() != weights_version) throw FormatError("unsupported weights version");
    const std::string arch = r.str(r.u32());
    std::string metadata = r.str(r.u32());
    ArchSpec spec;
    try {
        spec = parse_arch(arch);
    } catch (const Error& e) {
        throw FormatError(std::string("weights carry an invalid architecture: ") + e.what());
    }
    const std::uint64_t count = r.u64();
    if (count != spec.parameter_count()) throw FormatError("parameter count does not match the architecture");
    if (r.remaining() != count * 8) throw FormatError("weights payload size does not match the parameter count");
    std::vector<double> params(count);
    for (double& v : params) v = r.f64();
    Network net = Network::zeros(std::move(spec));
    net.set_parameters(params);
    return {std::move(net), std::move(metadata)};
}

void save_weights(const std::filesystem::path& path, const Network& network, const std::string& metadata) {
    write_file(path, encode_weights(network, metadata));
}

WeightsFile load_weights(const std::filesystem::path& path) { return decode_weights(read_file(path)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace inkdk
