#pragma once

// Experiment configuration: one JSON document with the sections seed, data,
// model, loss, optim, train, infer, eval and serve. Files are merged over the
// built-in defaults; every key must already exist there. Field reference in
// docs/config.md.

#include "svi/data/alpha.hpp"
#include "svi/data/stroke.hpp"
#include "svi/data/synth.hpp"
#include "svi/infer/propagate.hpp"
#include "svi/model/networks.hpp"
#include "svi/train/loop.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace svi {

nlohmann::json default_config();

struct SynthConfig {
    std::filesystem::path root;
    std::filesystem::path source_dir;  ///< empty: procedural clips
    std::filesystem::path noise_dir;   ///< empty: procedural noise
    std::int64_t train_clips = 4;
    std::int64_t val_clips = 0;
    std::int64_t frames = 8;
    std::int64_t height = 64;
    std::int64_t width = 64;
    std::int64_t noise_patches = 8;
    data::StrokeSpec stroke;
    data::SmoothSpec smooth;
    data::MotionJitter jitter;
};

struct InferConfig {
    std::filesystem::path checkpoint;  ///< "oracle" replays the dataset ground truth
    std::filesystem::path input;       ///< dataset root or a single clip directory
    std::string split = "train";
    std::filesystem::path annotations; ///< directory of NNNNN.png masks (single clip input)
    std::vector<std::int64_t> annotate;///< ground-truth masks used as annotations (dataset input)
    std::filesystem::path output;
    infer::PropagateOptions options;
};

struct EvalConfig {
    std::filesystem::path results;
    std::filesystem::path gt;
    std::filesystem::path output;
};

struct ServeConfig {
    std::filesystem::path checkpoint;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path workdir;
    std::filesystem::path static_dir;
    infer::PropagateOptions options;
};

class ExperimentConfig {
public:
    ExperimentConfig();

    /// Merges a JSON file over the current values. Throws ConfigError listing
    /// every unknown or mistyped key, IoError when the file is unreadable.
    void merge_file(const std::filesystem::path& path);
    void merge(const nlohmann::json& patch);
    /// Applies "a.b.c=value" overrides; values parse as JSON, else as strings.
    void apply_overrides(const std::vector<std::string>& overrides);
    void set_seed(std::uint64_t seed);

    const nlohmann::json& tree() const { return tree_; }
    std::uint64_t seed() const;

    SynthConfig synth() const;
    model::ModelConfig model() const;
    train::LossWeights loss() const;
    train::OptimConfig optim() const;
    train::TrainLoopConfig train_loop() const;
    train::CycleConfig cycle() const;
    InferConfig infer() const;
    EvalConfig eval() const;
    ServeConfig serve() const;

    /// Runs every section's validation; throws one ConfigError naming all bad keys.
    void validate() const;

    void write_snapshot(const std::filesystem::path& path) const;

private:
    nlohmann::json tree_;
};

}  // namespace svi
