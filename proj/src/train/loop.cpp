#include "svi/train/loop.hpp"

#include "svi/data/dataset.hpp"
#include "svi/error.hpp"

#include <algorithm>
#include <numeric>
#include <fstream>

namespace svi::train {

namespace {

model::InpaintingModel seeded_model(const model::ModelConfig& config, std::uint64_t seed) {
    torch::manual_seed(seed);
    return model::InpaintingModel(config);
}

}  // namespace

TrainingRun::TrainingRun(std::vector<data::CorruptedClip> clips, const model::ModelConfig& model_config,
                         const LossWeights& weights, const OptimConfig& optim, const CycleConfig& cycle)
    : clips_(std::move(clips)),
      keys_(enumerate_samples(clips_)),
      model_config_(model_config),
      optim_(optim),
      trainer_(seeded_model(model_config, optim.seed), weights, optim, cycle) {
    if (keys_.empty()) {
        throw ConfigError({"data"}, "training needs at least one clip with two or more frames");
    }
}

Batch TrainingRun::batch_for_step(std::int64_t step) const {
    const auto n = static_cast<std::int64_t>(keys_.size());
    const auto batch = optim_.batch_size;
    std::vector<SampleKey> picked;
    std::int64_t cached_epoch = -1;
    std::vector<std::size_t> order(keys_.size());
    for (std::int64_t i = 0; i < batch; ++i) {
        const auto pos = step * batch + i;
        const auto epoch = pos / n;
        if (epoch != cached_epoch) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::mt19937_64 shuffle_rng(data::derive_seed(optim_.seed, 1000 + static_cast<std::uint64_t>(epoch)));
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            cached_epoch = epoch;
        }
        picked.push_back(keys_[order[static_cast<std::size_t>(pos % n)]]);
    }
    std::mt19937_64 crop_rng(data::derive_seed(optim_.seed ^ 0x5EEDULL, static_cast<std::uint64_t>(step)));
    return make_batch(clips_, picked, model_config_.reference_radius, optim_.crop_size, crop_rng);
}

void TrainingRun::run_until(std::int64_t until, const ReportCallback& on_report) {
    while (trainer_.steps_taken() < until) {
        const auto step = trainer_.steps_taken();
        const auto report = trainer_.step(batch_for_step(step));
        if (on_report) {
            on_report(step, report);
        }
    }
}

void TrainingRun::save(const std::filesystem::path& path, const nlohmann::json& extra) {
    model::TensorArchive archive;
    archive.meta = extra;
    archive.meta["model"] = model_config_.to_json();
    archive.meta["optim"] = optim_.to_json();
    archive.meta["loss"] = trainer_.weights().to_json();
    archive.meta["step"] = trainer_.steps_taken();
    for (auto& [name, t] : model::model_state(*trainer_.model())) {
        archive.tensors.emplace("model/" + name, t);
    }
    for (auto& [name, t] : trainer_.optimizer_state()) {
        archive.tensors.emplace(name, t);
    }
    model::write_archive(path, archive);
}

void TrainingRun::restore(const std::filesystem::path& path) {
    const auto archive = model::read_archive(path);
    if (model::ModelConfig::from_json(archive.meta.at("model")) != model_config_) {
        throw ConfigError({"model"}, "checkpoint model configuration differs from the requested one");
    }
    model::load_model_state(*trainer_.model(), archive.tensors, "model/");
    trainer_.load_optimizer_state(archive.tensors);
    trainer_.set_steps_taken(archive.meta.at("step").get<std::int64_t>());
}

std::filesystem::path train_loop(const TrainLoopConfig& loop, const model::ModelConfig& model_config,
                                 const LossWeights& weights, const OptimConfig& optim,
                                 const nlohmann::json& resolved_config, const ReportCallback& on_report) {
    const auto index = data::read_manifest(loop.dataset_root);
    const auto records = index.split(loop.split);
    if (records.empty()) {
        throw ConfigError({"train.split"}, "dataset split '" + loop.split + "' is empty");
    }
    std::vector<data::CorruptedClip> clips;
    for (const auto& r : records) {
        clips.push_back(data::load_clip(loop.dataset_root, r));
    }
    TrainingRun run(std::move(clips), model_config, weights, optim);

    std::filesystem::create_directories(loop.checkpoint_dir);
    const auto latest = loop.checkpoint_dir / "latest.ckpt";
    const auto log_path = loop.checkpoint_dir / "train_log.jsonl";
    if (loop.resume && std::filesystem::exists(latest)) {
        run.restore(latest);
    }

    // Keep log lines up to the restored step so the log matches the checkpoint.
    std::vector<std::string> kept;
    if (std::filesystem::exists(log_path)) {
        std::ifstream in(log_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (!j.is_discarded() && j.value("step", std::int64_t{-1}) < run.trainer().steps_taken()) {
                kept.push_back(line);
            }
        }
    }
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) {
        throw IoError(log_path, "cannot write training log");
    }
    for (const auto& line : kept) {
        log << line << '\n';
    }

    const nlohmann::json extra = {{"config", resolved_config}};
    run.run_until(optim.total_steps, [&](std::int64_t step, const LossReport& report) {
        auto record = report.to_json();
        record["step"] = step;
        log << record.dump() << '\n';
        log.flush();
        if (on_report) {
            on_report(step, report);
        }
        const auto done = step + 1;
        if (loop.checkpoint_every > 0 && done % loop.checkpoint_every == 0) {
            run.save(loop.checkpoint_dir / ("step_" + std::to_string(done) + ".ckpt"), extra);
            run.save(latest, extra);
        }
    });
    run.save(latest, extra);
    return latest;
}

}  // namespace svi::train
