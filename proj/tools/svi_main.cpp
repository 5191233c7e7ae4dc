// svi: command line entry point (synth | train | infer | eval | serve).

#include "svi/config.hpp"
#include "svi/error.hpp"
#include "svi/model/checkpoint.hpp"
#include "svi/pipeline.hpp"
#include "svi/service/server.hpp"
#include "svi/train/loop.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using nlohmann::json;

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
};

int fail(const std::string& kind, const std::string& message, const json& extra = json::object()) {
    json line = extra;
    line["error"] = kind;
    line["message"] = message;
    std::cerr << line.dump() << std::endl;
    return kind == "config" ? 2 : kind == "io" ? 3 : 1;
}

/// Adds `key=value` when the flag was given.
template <typename T>
void forward(CLI::App* app, const char* flag, const T& value, const std::string& key,
             std::vector<std::string>& overrides) {
    if (app->count(flag) > 0) {
        overrides.push_back(key + "=" + json(value).dump());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised video inpainting: synthesis, training, inference, evaluation and serving"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("-c,--config", opt.config_path, "JSON configuration file merged over the defaults");
    app.add_option("-s,--set", opt.overrides, "Override a configuration key, e.g. optim.learning_rate=2e-4");
    app.add_option("--seed", opt.seed, "Master seed (overrides the 'seed' key)");
    app.add_flag("-v,--verbose", opt.verbosity, "More progress output (repeatable)");

    std::vector<std::string> extra;

    auto* synth = app.add_subcommand("synth", "Generate a corrupted training corpus");
    std::string synth_out;
    std::int64_t synth_clips = 0;
    synth->add_option("-o,--out", synth_out, "Dataset root (data.root)");
    synth->add_option("-n,--clips", synth_clips, "Training clips (data.train_clips)");

    auto* train = app.add_subcommand("train", "Train both networks jointly");
    std::string train_data, train_ckpt;
    std::int64_t train_steps = 0;
    train->add_option("-d,--data", train_data, "Dataset root (train.dataset)");
    train->add_option("-o,--checkpoint-dir", train_ckpt, "Checkpoint directory (train.checkpoint_dir)");
    train->add_option("--steps", train_steps, "Total Adam steps (optim.total_steps)");

    auto* infer = app.add_subcommand("infer", "Complete clips from sparse mask annotations");
    std::string infer_ckpt, infer_input, infer_ann, infer_out;
    std::vector<std::int64_t> infer_annotate;
    infer->add_option("-m,--checkpoint", infer_ckpt, "Checkpoint file or 'oracle' (infer.checkpoint)");
    infer->add_option("-i,--input", infer_input, "Dataset root or clip directory (infer.input)");
    infer->add_option("-a,--annotations", infer_ann, "Annotation folder (infer.annotations)");
    infer->add_option("--annotate", infer_annotate, "Ground-truth frames used as annotations (infer.annotate)");
    infer->add_option("-o,--output", infer_out, "Result root (infer.output)");

    auto* evaluate = app.add_subcommand("eval", "Score results against ground truth");
    std::string eval_results, eval_gt, eval_out;
    evaluate->add_option("-r,--results", eval_results, "Result root (eval.results)");
    evaluate->add_option("-g,--gt", eval_gt, "Dataset root (eval.gt)");
    evaluate->add_option("-o,--output", eval_out, "Report directory (eval.output)");

    auto* serve = app.add_subcommand("serve", "Run the HTTP annotation service");
    std::string serve_ckpt, serve_host, serve_workdir, serve_static;
    int serve_port = 0;
    serve->add_option("-m,--checkpoint", serve_ckpt, "Checkpoint file (serve.checkpoint)");
    serve->add_option("--host", serve_host, "Bind address (serve.host)");
    serve->add_option("-p,--port", serve_port, "Port (serve.port)");
    serve->add_option("-w,--workdir", serve_workdir, "Session storage (serve.workdir)");
    serve->add_option("--static", serve_static, "Directory served at / (serve.static_dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    forward(synth, "--out", synth_out, "data.root", extra);
    forward(synth, "--clips", synth_clips, "data.train_clips", extra);
    forward(train, "--data", train_data, "train.dataset", extra);
    forward(train, "--checkpoint-dir", train_ckpt, "train.checkpoint_dir", extra);
    forward(train, "--steps", train_steps, "optim.total_steps", extra);
    forward(infer, "--checkpoint", infer_ckpt, "infer.checkpoint", extra);
    forward(infer, "--input", infer_input, "infer.input", extra);
    forward(infer, "--annotations", infer_ann, "infer.annotations", extra);
    forward(infer, "--annotate", infer_annotate, "infer.annotate", extra);
    forward(infer, "--output", infer_out, "infer.output", extra);
    forward(evaluate, "--results", eval_results, "eval.results", extra);
    forward(evaluate, "--gt", eval_gt, "eval.gt", extra);
    forward(evaluate, "--output", eval_out, "eval.output", extra);
    forward(serve, "--checkpoint", serve_ckpt, "serve.checkpoint", extra);
    forward(serve, "--host", serve_host, "serve.host", extra);
    forward(serve, "--port", serve_port, "serve.port", extra);
    forward(serve, "--workdir", serve_workdir, "serve.workdir", extra);
    forward(serve, "--static", serve_static, "serve.static_dir", extra);

    const auto log = [&](const std::string& line) {
        if (opt.verbosity > 0) {
            std::cerr << line << std::endl;
        }
    };

    try {
        svi::ExperimentConfig config;
        if (!opt.config_path.empty()) {
            config.merge_file(opt.config_path);
        }
        config.apply_overrides(opt.overrides);
        config.apply_overrides(extra);
        if (opt.seed) {
            config.set_seed(*opt.seed);
        }
        config.validate();
        torch::manual_seed(config.seed());

        if (synth->parsed()) {
            const auto c = config.synth();
            const auto index = svi::run_synth(c, config.seed(), log);
            config.write_snapshot(c.root / "resolved_config.json");
            std::cout << json{{"dataset", c.root.string()}, {"clips", index.clips.size()}}.dump() << std::endl;
        } else if (train->parsed()) {
            const auto loop = config.train_loop();
            std::filesystem::create_directories(loop.checkpoint_dir);
            config.write_snapshot(loop.checkpoint_dir / "resolved_config.json");
            const auto every = opt.verbosity > 1 ? 1 : 50;
            const auto path = svi::train::train_loop(
                loop, config.model(), config.loss(), config.optim(), config.tree(),
                [&](std::int64_t step, const svi::train::LossReport& r) {
                    if (step % every == 0) {
                        log("step " + std::to_string(step) + " " + r.to_json().dump());
                    }
                });
            std::cout << json{{"checkpoint", path.string()}}.dump() << std::endl;
        } else if (infer->parsed()) {
            const auto c = config.infer();
            const auto records = svi::run_infer(c, log);
            config.write_snapshot(c.output / "resolved_config.json");
            std::cout << json{{"results", c.output.string()}, {"clips", records.size()}}.dump() << std::endl;
        } else if (evaluate->parsed()) {
            const auto c = config.eval();
            const auto report = svi::run_eval(c);
            config.write_snapshot(c.output / "resolved_config.json");
            std::cout << report.to_table();
        } else if (serve->parsed()) {
            const auto c = config.serve();
            std::filesystem::create_directories(c.workdir);
            config.write_snapshot(c.workdir / "resolved_config.json");
            auto backend = std::make_shared<svi::infer::NetworkBackend>(svi::model::load_model(c.checkpoint));
            svi::service::InpaintService service(c.workdir, backend, c.options, c.static_dir);
            std::cerr << "listening on " << c.host << ":" << c.port << std::endl;
            service.listen(c.host, c.port);
        }
    } catch (const svi::ConfigError& e) {
        return fail("config", e.what(), {{"keys", e.keys()}});
    } catch (const svi::IoError& e) {
        return fail("io", e.what(), {{"path", e.path().string()}});
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
