#pragma once

#include "svi/data/synth.hpp"
#include "svi/train/trainer.hpp"

#include <filesystem>
#include <functional>

namespace svi::train {

using ReportCallback = std::function<void(std::int64_t step, const LossReport& report)>;

/// In-memory training over a fixed clip set. Batch composition is a pure
/// function of (seed, step): epoch e visits every sample once in an order
/// shuffled by a seed derived from (seed, e), so a run restored at step k
/// continues exactly like an uninterrupted one.
class TrainingRun {
public:
    TrainingRun(std::vector<data::CorruptedClip> clips, const model::ModelConfig& model_config,
                const LossWeights& weights, const OptimConfig& optim, const CycleConfig& cycle = {});

    Batch batch_for_step(std::int64_t step) const;

    /// Steps until `steps_taken() == until`.
    void run_until(std::int64_t until, const ReportCallback& on_report = {});

    /// Model, optimizer moments and step counter in one archive.
    void save(const std::filesystem::path& path, const nlohmann::json& extra = nlohmann::json::object());
    void restore(const std::filesystem::path& path);

    Trainer& trainer() { return trainer_; }
    model::InpaintingModel& model() { return trainer_.model(); }
    const std::vector<data::CorruptedClip>& clips() const { return clips_; }
    std::size_t sample_count() const { return keys_.size(); }

private:
    std::vector<data::CorruptedClip> clips_;
    std::vector<SampleKey> keys_;
    model::ModelConfig model_config_;
    OptimConfig optim_;
    Trainer trainer_;
};

struct TrainLoopConfig {
    std::filesystem::path dataset_root;
    std::string split = "train";
    std::filesystem::path checkpoint_dir;
    std::int64_t checkpoint_every = 500;
    bool resume = true;
};

/// Loads the split, resumes from `<checkpoint_dir>/latest.ckpt` when present,
/// trains to total_steps writing periodic checkpoints and a line-delimited
/// loss log (`train_log.jsonl`). Returns the path of the final checkpoint.
std::filesystem::path train_loop(const TrainLoopConfig& loop, const model::ModelConfig& model_config,
                                 const LossWeights& weights, const OptimConfig& optim,
                                 const nlohmann::json& resolved_config = nlohmann::json::object(),
                                 const ReportCallback& on_report = {});

}  // namespace svi::train
