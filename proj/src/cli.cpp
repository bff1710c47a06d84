#include "inkdk/cli.hpp"

#include "inkdk/error.hpp"
#include "inkdk/rng.hpp"
#include "inkdk/training.hpp"

#include "bytes.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace inkdk {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> pipeline_keys{"preset", "features", "raster", "nln", "augment", "spacing"};

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

const json& object_block(const json& j, const char* key, const std::set<std::string>& allowed) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    const json& b = j.at(key);
    if (!b.is_object()) throw ConfigError(std::string("\"") + key + "\" must be an object");
    for (const auto& [k, v] : b.items()) {
        if (!allowed.contains(k)) throw ConfigError(std::string("unknown key \"") + key + "." + k + "\"");
    }
    return b;
}

ArchSpec checked_parse(const std::string& text) {
    try {
        return parse_arch(text);
    } catch (const SyntaxError& e) {
        throw ConfigError(std::string("architecture: ") + e.what());
    } catch (const ShapeError& e) {
        throw ConfigError(std::string("architecture: ") + e.what());
    }
}

void refuse_existing(const std::vector<fs::path>& paths, bool force) {
    if (force) return;
    for (const fs::path& p : paths) {
        if (fs::exists(p)) throw IoError(p.string() + " already exists (use --force to overwrite)");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json parse_json_file(const fs::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json weights_metadata(const RunConfig& config, const ArchSpec& spec, const std::vector<std::string>& class_table,
                      int best_epoch) {
    return {{"tool_version", tool_version},
            {"config_hash", config.hash()},
            {"pipeline_hash", pipeline_hash(config.pipeline)},
            {"pipeline", to_json(config.pipeline)},
            {"arch", spec.to_string()},
            {"class_table", class_table},
            {"best_epoch", best_epoch}};
}

} // namespace

std::string hash_hex(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

std::string pipeline_hash(const PipelineConfig& pipeline) { return hash_hex(to_json(pipeline).dump()); }

ArchSpec RunConfig::arch_spec(int classes) const {
    return checked_parse(resolve_arch(arch, pipeline.channels(), classes));
}

TrainConfig RunConfig::train_config(const ArchSpec& spec) const {
    TrainConfig t = train;
    t.seed = derive_seed(seed, "train");
    if (dropout) {
        t.dropout = *dropout;
    } else if (arch == desk_arch) {
        t.dropout.assign(std::begin(desk_dropout), std::end(desk_dropout));
    } else {
        t.dropout.assign(static_cast<std::size_t>(spec.weighted_layer_count()), 0.0);
    }
    return t;
}

SynthConfig RunConfig::synth_config() const {
    SynthConfig s = synth;
    s.seed = derive_seed(seed, "synth");
    return s;
}

void RunConfig::validate() const {
    synth_config().validate();
    if (test_per_class < 0) throw ConfigError("test_per_class must be non-negative");
    pipeline.validate();
    const ArchSpec spec = arch_spec(synth.num_classes);
    if (spec.input.c != pipeline.channels())
        throw ConfigError("architecture takes " + std::to_string(spec.input.c) + " input maps but the features produce " +
                          std::to_string(pipeline.channels()));
    if (spec.input.h != pipeline.render.outer || spec.input.w != pipeline.render.outer)
        throw ConfigError("architecture input is " + std::to_string(spec.input.h) + "x" + std::to_string(spec.input.w) +
                          " but the raster is " + std::to_string(pipeline.render.outer) + "x" +
                          std::to_string(pipeline.render.outer));
    train_config(spec).validate(spec);
    if (holdout_every < 0 || holdout_every == 1) throw ConfigError("holdout_every must be 0 or at least 2");
    if (!(threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
}

json RunConfig::to_json() const {
    json j = inkdk::to_json(pipeline);
    j["seed"] = seed;
    j["output_dir"] = output_dir.generic_string();
    j["dataio"] = {{"synth",
                    {{"num_classes", synth.num_classes},
                     {"samples_per_class", synth.samples_per_class},
                     {"test_per_class", test_per_class},
                     {"jitter_scale", synth.jitter_scale}}}};
    j["net"] = {{"arch", arch},
                {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate},
                {"momentum", train.momentum},
                {"lr_decay", train.lr_decay},
                {"dropout", dropout ? json(*dropout) : json(nullptr)},
                {"epochs", train.epochs},
                {"holdout_every", holdout_every}};
    j["ensemble"] = {{"threshold", threshold}};
    return j;
}

std::string RunConfig::hash() const { return hash_hex(to_json().dump()); }

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    static const std::set<std::string> top{"seed",    "output_dir", "dataio", "preset", "features", "raster",
                                           "nln",     "augment",    "spacing", "net",   "ensemble"};
    for (const auto& [k, v] : j.items()) {
        if (!top.contains(k)) throw ConfigError("unknown key \"" + k + "\"");
    }
    RunConfig c;
    read(j, "seed", c.seed);
    std::string out_dir = c.output_dir.string();
    read(j, "output_dir", out_dir);
    c.output_dir = out_dir;

    const json& dataio = object_block(j, "dataio", {"synth"});
    const json& synth =
        object_block(dataio, "synth", {"num_classes", "samples_per_class", "test_per_class", "jitter_scale"});
    read(synth, "num_classes", c.synth.num_classes);
    read(synth, "samples_per_class", c.synth.samples_per_class);
    read(synth, "test_per_class", c.test_per_class);
    read(synth, "jitter_scale", c.synth.jitter_scale);

    json pipe = json::object();
    for (const auto& [k, v] : j.items()) {
        if (pipeline_keys.contains(k)) pipe[k] = v;
    }
    c.pipeline = pipeline_from_json(pipe);

    const json& net = object_block(j, "net",
                                   {"arch", "batch_size", "learning_rate", "momentum", "lr_decay", "dropout", "epochs",
                                    "holdout_every"});
    read(net, "arch", c.arch);
    read(net, "batch_size", c.train.batch_size);
    read(net, "learning_rate", c.train.learning_rate);
    read(net, "momentum", c.train.momentum);
    read(net, "lr_decay", c.train.lr_decay);
    if (net.contains("dropout") && !net.at("dropout").is_null()) {
        std::vector<double> d;
        read(net, "dropout", d);
        c.dropout = d;
    }
    read(net, "epochs", c.train.epochs);
    read(net, "holdout_every", c.holdout_every);

    const json& ens = object_block(j, "ensemble", {"threshold"});
    read(ens, "threshold", c.threshold);

    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) { return run_config_from_json(parse_json_file(path)); }

Dataset load_dataset(const fs::path& path) {
    if (path.extension() == ".pot") return parse_pot(read_file(path));
    return read_inkjson(path);
}

std::vector<std::uint8_t> encode_archive(const TensorArchive& archive) {
    if (archive.labels.size() != archive.tensors.size())
        throw InvalidArgument("archive needs one label per tensor");
    ByteWriter w;
    w.bytes("IKA1");
    w.u16(1);
    const std::string meta = archive.metadata.dump();
    w.u32(static_cast<std::uint32_t>(meta.size()));
    w.bytes(meta);
    w.u32(static_cast<std::uint32_t>(archive.tensors.size()));
    for (std::size_t i = 0; i < archive.tensors.size(); ++i) {
        w.u16(static_cast<std::uint16_t>(archive.labels[i].size()));
        w.bytes(archive.labels[i]);
        const std::vector<std::uint8_t> t = encode_tensor(archive.tensors[i]);
        w.u32(static_cast<std::uint32_t>(t.size()));
        w.buffer().insert(w.buffer().end(), t.begin(), t.end());
    }
    return std::move(w.buffer());
}

TensorArchive decode_archive(std::span<const std::uint8_t> bytes) {
    const auto fail = [](std::size_t offset, const char* reason) {
        throw FormatError("tensor archive at byte " + std::to_string(offset) + ": " + reason);
    };
    ByteReader r(bytes, fail);
    if (r.str(4) != "IKA1") throw FormatError("not a tensor archive (bad magic)");
    if (const auto v = r.u16(); v != 1) throw FormatError("unsupported tensor archive version " + std::to_string(v));
    TensorArchive a;
    try {
        a.metadata = json::parse(r.str(r.u32()));
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("tensor archive metadata: ") + e.what());
    }
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        a.labels.push_back(r.str(r.u16()));
        const std::uint32_t len = r.u32();
        const std::size_t at = r.pos();
        r.str(len);
        a.tensors.push_back(decode_tensor(bytes.subspan(at, len)));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after tensor archive");
    return a;
}

void cmd_synth(const RunConfig& config, const SynthArgs& args, std::ostream& log) {
    config.validate();
    const fs::path train_path = args.out / "train.jsonl";
    const fs::path test_path = args.out / "test.jsonl";
    const fs::path manifest_path = args.out / "manifest.json";
    refuse_existing({train_path, test_path, manifest_path}, args.force);

    const SynthConfig sc = config.synth_config();
    const Dataset train = synth_dataset(sc);
    Dataset test;
    if (config.test_per_class > 0) {
        SynthConfig tc = sc;
        tc.samples_per_class = config.test_per_class;
        test = synth_dataset(tc, sc.samples_per_class);
    }
    fs::create_directories(args.out);
    write_inkjson(train_path, train);
    write_inkjson(test_path, test);
    const json manifest{{"tool_version", tool_version},
                        {"config_hash", config.hash()},
                        {"grammar_version", synth_grammar_version},
                        {"seed", config.seed},
                        {"class_table", train.class_table()},
                        {"files",
                         {{"train", {{"path", "train.jsonl"}, {"samples", train.size()}}},
                          {"test", {{"path", "test.jsonl"}, {"samples", test.size()}}}}}};
    write_text(manifest_path, manifest.dump(2) + "\n");
    log << "wrote " << train.size() << " training and " << test.size() << " test samples of "
        << train.class_table().size() << " classes to " << args.out.string() << '\n';
}

void cmd_featurize(const RunConfig& config, const FeaturizeArgs& args, std::ostream& log) {
    config.validate();
    refuse_existing({args.out}, args.force);
    const Dataset data = load_dataset(args.dataset);

    TensorArchive archive;
    archive.metadata = {{"tool_version", tool_version},
                        {"config_hash", config.hash()},
                        {"pipeline_hash", pipeline_hash(config.pipeline)},
                        {"pipeline", to_json(config.pipeline)},
                        {"channel_labels", config.pipeline.features.channel_labels()},
                        {"train_mode", args.train_mode},
                        {"samples", data.size()}};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Ink& ink = data.samples()[i];
        std::optional<std::uint64_t> seed;
        if (args.train_mode) seed = derive_seed(config.seed, "featurize", i);
        try {
            archive.tensors.push_back(featurize(ink, config.pipeline, seed));
        } catch (const std::exception& e) {
            throw Error("sample " + std::to_string(i) + ": " + e.what());
        }
        archive.labels.push_back(ink.label().value_or(""));
    }
    const std::vector<std::uint8_t> bytes = encode_archive(archive);
    if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
    write_file(args.out, bytes);
    log << "wrote " << archive.tensors.size() << " tensors of " << config.pipeline.channels() << "x"
        << config.pipeline.render.outer << "x" << config.pipeline.render.outer << " to " << args.out.string() << '\n';
}

void cmd_train(const RunConfig& config, const TrainArgs& args, std::ostream& log) {
    config.validate();
    const Dataset all = load_dataset(args.dataset);
    if (all.empty()) throw Error(args.dataset.string() + " holds no samples");
    const std::vector<std::string>& class_table = all.class_table();
    const ArchSpec spec = config.arch_spec(static_cast<int>(class_table.size()));
    if (spec.classes() != static_cast<int>(class_table.size()))
        throw ConfigError("architecture has " + std::to_string(spec.classes()) + " outputs but the dataset has " +
                          std::to_string(class_table.size()) + " classes");
    const TrainConfig tc = config.train_config(spec);
    tc.validate(spec);

    const fs::path weights_path = args.out / "weights.ikw";
    const fs::path log_path = args.out / "train_log.jsonl";
    const fs::path report_path = args.out / "train_report.json";
    refuse_existing({weights_path, log_path, report_path}, args.force);

    Dataset train = all;
    Dataset holdout;
    if (args.valid) {
        holdout = load_dataset(*args.valid);
    } else if (config.holdout_every > 0) {
        std::vector<Ink> keep;
        std::vector<Ink> held;
        for (std::size_t i = 0; i < all.size(); ++i) {
            (i % static_cast<std::size_t>(config.holdout_every) == 0 ? held : keep).push_back(all.samples()[i]);
        }
        train = Dataset(std::move(keep));
        holdout = Dataset(std::move(held));
    }

    std::string log_lines;
    FitOptions options;
    const auto t0 = std::chrono::steady_clock::now();
    options.on_epoch = [&](const EpochLog& e) {
        json line{{"epoch", e.epoch}, {"learning_rate", e.learning_rate}, {"train_loss", e.train_loss}};
        line["holdout_accuracy"] = e.holdout_accuracy ? json(*e.holdout_accuracy) : json(nullptr);
        log_lines += line.dump() + "\n";
        char buf[128];
        std::snprintf(buf, sizeof buf, "epoch %3d  lr %.5f  loss %.5f", e.epoch, e.learning_rate, e.train_loss);
        log << buf;
        if (e.holdout_accuracy) {
            std::snprintf(buf, sizeof buf, "  holdout %.4f", *e.holdout_accuracy);
            log << buf;
        }
        log << '\n';
    };
    const FitResult result =
        fit(spec, train, class_table, config.pipeline, tc, holdout.empty() ? nullptr : &holdout, options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(args.out);
    save_weights(weights_path, result.network, weights_metadata(config, spec, class_table, result.best_epoch).dump());
    write_text(log_path, log_lines);
    json report{{"tool_version", tool_version},
                {"config_hash", config.hash()},
                {"arch", spec.to_string()},
                {"parameters", spec.parameter_count()},
                {"train_samples", train.size()},
                {"holdout_samples", holdout.size()},
                {"epochs", tc.epochs},
                {"best_epoch", result.best_epoch},
                {"final_train_loss", result.log.back().train_loss},
                {"train_seconds", seconds}};
    const auto& best = result.log[static_cast<std::size_t>(result.best_epoch)];
    report["holdout_accuracy"] = best.holdout_accuracy ? json(*best.holdout_accuracy) : json(nullptr);
    write_text(report_path, report.dump(2) + "\n");
    log << "best epoch " << result.best_epoch << ", weights written to " << weights_path.string() << '\n';
}

namespace {

Member load_member(const std::string& name, const fs::path& weights, const std::optional<PipelineConfig>& expected,
                   bool force, std::vector<std::string>& class_table) {
    WeightsFile wf = load_weights(weights);
    if (wf.metadata.empty()) throw Error(weights.string() + " carries no pipeline metadata");
    json meta;
    try {
        meta = json::parse(wf.metadata);
    } catch (const json::parse_error& e) {
        throw FormatError(weights.string() + " metadata: " + e.what());
    }
    if (!meta.contains("pipeline") || !meta.contains("pipeline_hash") || !meta.contains("class_table"))
        throw FormatError(weights.string() + " metadata lacks pipeline or class table");
    PipelineConfig pipeline = pipeline_from_json(meta.at("pipeline"));
    const std::string stored = meta.at("pipeline_hash").get<std::string>();
    if (pipeline_hash(pipeline) != stored && !force)
        throw Error(weights.string() + ": stored pipeline does not hash to " + stored +
                    " (written by tool version " + meta.value("tool_version", "?") + "; use --force)");
    if (expected) {
        if (pipeline_hash(*expected) != stored && !force)
            throw Error(weights.string() + ": featurizer hash " + pipeline_hash(*expected) +
                        " does not match the network's " + stored + " (use --force)");
        pipeline = *expected;
    }
    const auto table = meta.at("class_table").get<std::vector<std::string>>();
    if (class_table.empty()) {
        class_table = table;
    } else if (table != class_table) {
        throw ConfigError(weights.string() + " does not share the ensemble's class table");
    }
    Member m{name, pipeline, std::move(wf.network)};
    m.validate();
    return m;
}

} // namespace

CascadeConfig load_cascade(const EvalArgs& args) {
    if (args.weights.has_value() == args.manifest.has_value())
        throw ConfigError("give exactly one of --weights or --manifest");
    CascadeConfig cascade;
    if (args.weights) {
        cascade.members.push_back(load_member(args.weights->stem().string(), *args.weights, args.expected_pipeline,
                                              args.force, cascade.class_table));
    } else {
        const json m = parse_json_file(*args.manifest);
        if (!m.is_object() || !m.contains("members") || !m.at("members").is_array() || m.at("members").empty())
            throw ConfigError("manifest needs a nonempty \"members\" list");
        read(m, "threshold", cascade.threshold);
        const fs::path base = args.manifest->parent_path();
        for (const json& entry : m.at("members")) {
            if (!entry.is_object() || !entry.contains("weights") || !entry.at("weights").is_string())
                throw ConfigError("every manifest member needs a \"weights\" path");
            const fs::path w = base / entry.at("weights").get<std::string>();
            std::optional<PipelineConfig> expected = args.expected_pipeline;
            if (entry.contains("pipeline")) expected = pipeline_from_json(entry.at("pipeline"));
            const std::string name = entry.value("name", w.parent_path().filename().string());
            cascade.members.push_back(load_member(name, w, expected, args.force, cascade.class_table));
        }
    }
    if (args.threshold) cascade.threshold = *args.threshold;
    cascade.validate();
    return cascade;
}

EvalReport cmd_eval(const EvalArgs& args, std::ostream& log) {
    const CascadeConfig cascade = load_cascade(args);
    if (args.out) refuse_existing({*args.out}, args.force);
    const Dataset data = load_dataset(args.dataset);
    const EvalReport report = evaluate(cascade, data, args.method);
    log << report.table();
    if (args.out) {
        json j = report.to_json(args.timing);
        std::vector<std::string> names;
        for (const Member& m : cascade.members) names.push_back(m.name);
        j["members"] = names;
        j["tool_version"] = tool_version;
        write_text(*args.out, j.dump(2) + "\n");
    }
    return report;
}

void cmd_pot2json(const Pot2JsonArgs& args, std::ostream& log) {
    refuse_existing({args.out}, args.force);
    const Dataset data = parse_pot(read_file(args.input));
    if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
    write_inkjson(args.out, data);
    log << "converted " << data.size() << " samples of " << data.class_table().size() << " classes\n";
}

} // namespace inkdk
