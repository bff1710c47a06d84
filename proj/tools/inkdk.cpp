#include "inkdk/cli.hpp"
#include "inkdk/selfcheck.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace inkdk;

namespace {

struct ConfigFlags {
    std::string path;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::string preset;

    void add(CLI::App& app, bool training) {
        app.add_option("-c,--config", path, "run configuration (JSON)");
        app.add_option("--seed", seed, "global seed (overrides the configuration)");
        app.add_option("--preset", preset, "feature preset A-H (overrides the configuration)");
        if (training) app.add_option("--epochs", epochs, "training epochs (overrides the configuration)");
    }

    RunConfig load() const {
        nlohmann::json j = nlohmann::json::object();
        if (!path.empty()) {
            try {
                std::ifstream in(path);
                if (!in) throw ConfigError("cannot read configuration " + path);
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(path + ": " + e.what());
            }
        }
        if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
        if (seed) j["seed"] = *seed;
        if (!preset.empty()) {
            for (const char* key : {"features", "augment", "nln"}) j.erase(key);
            j["preset"] = preset;
        }
        if (epochs) j["net"]["epochs"] = *epochs;
        return run_config_from_json(j);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online handwriting recognition toolkit: features, training and ensemble evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    int code = exit_ok;

    auto* synth = app.add_subcommand("synth", "generate a synthetic glyph dataset");
    ConfigFlags synth_cfg;
    synth_cfg.add(*synth, false);
    std::string synth_out;
    bool synth_force = false;
    synth->add_option("-o,--out", synth_out, "output directory (default: the configured output_dir)");
    synth->add_flag("--force", synth_force, "overwrite existing files");
    synth->callback([&] {
        code = guarded(std::cerr, [&] {
            const RunConfig c = synth_cfg.load();
            cmd_synth(c, {synth_out.empty() ? c.output_dir : std::filesystem::path(synth_out), synth_force}, std::cout);
        });
    });

    auto* feat = app.add_subcommand("featurize", "render a dataset into a tensor archive");
    ConfigFlags feat_cfg;
    feat_cfg.add(*feat, false);
    FeaturizeArgs feat_args;
    std::string feat_dataset;
    std::string feat_out;
    feat->add_option("-d,--dataset", feat_dataset, "dataset (.jsonl or .pot)")->required();
    feat->add_option("-o,--out", feat_out, "archive path")->required();
    feat->add_flag("--train-mode", feat_args.train_mode, "apply seeded training deformations");
    feat->add_flag("--force", feat_args.force, "overwrite an existing archive");
    feat->callback([&] {
        code = guarded(std::cerr, [&] {
            feat_args.dataset = feat_dataset;
            feat_args.out = feat_out;
            cmd_featurize(feat_cfg.load(), feat_args, std::cout);
        });
    });

    auto* train = app.add_subcommand("train", "train one network");
    ConfigFlags train_cfg;
    train_cfg.add(*train, true);
    std::string train_dataset;
    std::string train_valid;
    std::string train_out;
    bool train_force = false;
    train->add_option("-d,--dataset", train_dataset, "training dataset")->required();
    train->add_option("--valid", train_valid, "held-out dataset (default: every n-th training sample)");
    train->add_option("-o,--out", train_out, "output directory (default: the configured output_dir)");
    train->add_flag("--force", train_force, "overwrite existing files");
    train->callback([&] {
        code = guarded(std::cerr, [&] {
            const RunConfig c = train_cfg.load();
            TrainArgs a{train_dataset, std::nullopt, train_out.empty() ? c.output_dir : std::filesystem::path(train_out),
                        train_force};
            if (!train_valid.empty()) a.valid = train_valid;
            cmd_train(c, a, std::cout);
        });
    });

    auto* eval = app.add_subcommand("eval", "evaluate a network or an ensemble");
    std::string eval_weights;
    std::string eval_manifest;
    std::string eval_dataset;
    std::string eval_method = "hsp";
    std::optional<double> eval_threshold;
    std::string eval_config;
    std::string eval_out;
    bool eval_no_timing = false;
    bool eval_force = false;
    auto* w_opt = eval->add_option("-w,--weights", eval_weights, "weight file");
    auto* m_opt = eval->add_option("-m,--manifest", eval_manifest, "ensemble manifest");
    w_opt->excludes(m_opt);
    eval->add_option("-d,--dataset", eval_dataset, "labelled dataset")->required();
    eval->add_option("--method", eval_method, "single|hsp|vote|average");
    eval->add_option("--threshold", eval_threshold, "HSP exit threshold (default 0.99)");
    eval->add_option("-c,--config", eval_config, "run configuration whose featurizer must match the network");
    eval->add_option("-o,--out", eval_out, "write the report as JSON");
    eval->add_flag("--no-timing", eval_no_timing, "omit wall-clock fields from the JSON report");
    eval->add_flag("--force", eval_force, "accept featurizer hash mismatches and overwrite the report");
    eval->callback([&] {
        code = guarded(std::cerr, [&] {
            EvalArgs a;
            if (!eval_weights.empty()) a.weights = eval_weights;
            if (!eval_manifest.empty()) a.manifest = eval_manifest;
            a.dataset = eval_dataset;
            a.method = method_from_string(eval_method);
            a.threshold = eval_threshold;
            if (!eval_config.empty()) a.expected_pipeline = load_run_config(eval_config).pipeline;
            if (!eval_out.empty()) a.out = eval_out;
            a.timing = !eval_no_timing;
            a.force = eval_force;
            cmd_eval(a, std::cout);
        });
    });

    auto* check = app.add_subcommand("selfcheck", "run the embedded verification suite");
    SelfcheckOptions check_opts;
    check->add_option("--inject-gradient-fault", check_opts.gradient_fault,
                      "scale analytic gradients by (1 + value); the gradient check must fail");
    check->callback([&] {
        bool passed = false;
        code = guarded(std::cerr, [&] { passed = print_checks(run_selfcheck(check_opts), std::cout); });
        if (code == exit_ok && !passed) code = exit_failure;
    });

    auto* pot = app.add_subcommand("pot2json", "convert a POT file to JSON-lines");
    Pot2JsonArgs pot_args;
    std::string pot_in;
    std::string pot_out;
    pot->add_option("input", pot_in, "POT file")->required();
    pot->add_option("-o,--out", pot_out, "JSON-lines output")->required();
    pot->add_flag("--force", pot_args.force, "overwrite an existing file");
    pot->callback([&] {
        code = guarded(std::cerr, [&] {
            pot_args.input = pot_in;
            pot_args.out = pot_out;
            cmd_pot2json(pot_args, std::cout);
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }
    return code;
}
