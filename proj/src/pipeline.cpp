#include "svi/pipeline.hpp"

#include "svi/data/procedural.hpp"
#include "svi/error.hpp"
#include "svi/image.hpp"
#include "svi/model/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

namespace svi {
namespace {

std::vector<data::SourceClip> source_clips(const SynthConfig& c, std::uint64_t seed) {
    const auto count = c.train_clips + c.val_clips;
    std::vector<data::SourceClip> clips;
    if (c.source_dir.empty()) {
        for (std::int64_t i = 0; i < count; ++i) {
            char id[32];
            std::snprintf(id, sizeof(id), "clip-%03lld", static_cast<long long>(i));
            clips.push_back(data::make_procedural_clip(id, c.frames, c.height, c.width,
                                                       data::derive_seed(seed, 100 + static_cast<std::uint64_t>(i))));
        }
        return clips;
    }
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(c.source_dir)) {
        if (entry.is_directory()) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    if (static_cast<std::int64_t>(dirs.size()) < count) {
        throw IoError(c.source_dir, "needs " + std::to_string(count) + " clip folders, found " +
                                        std::to_string(dirs.size()));
    }
    for (std::int64_t i = 0; i < count; ++i) {
        auto src = data::load_source_clip(dirs[static_cast<std::size_t>(i)]);
        const auto keep = std::min<std::int64_t>(src.length(), c.frames);
        std::vector<torch::Tensor> frames;
        for (std::int64_t t = 0; t < keep; ++t) {
            frames.push_back(quantize8(data::fit_patch(src.frames[t], c.height, c.width)));
        }
        src.frames = torch::stack(frames);
        clips.push_back(std::move(src));
    }
    return clips;
}

}  // namespace

data::DatasetIndex run_synth(const SynthConfig& config, std::uint64_t seed, const LogFn& log) {
    const auto clips = source_clips(config, seed);
    const auto bank = config.noise_dir.empty()
                          ? data::make_procedural_noise_bank(static_cast<std::size_t>(config.noise_patches),
                                                             config.height, config.width, data::derive_seed(seed, 7))
                          : data::load_noise_bank(config.noise_dir);
    const auto stroke = config.stroke.scaled_to(config.height, config.width);
    data::DatasetIndex index;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto clip = data::synthesize_clip(clips[i], bank, stroke, config.smooth, config.jitter,
                                                data::derive_seed(seed, 200 + i));
        const auto split = static_cast<std::int64_t>(i) < config.train_clips ? "train" : "val";
        index.clips.push_back(data::write_clip(config.root, split, clip));
        if (log) {
            log("wrote " + index.clips.back().dir);
        }
    }
    data::write_manifest(config.root, index);
    return index;
}

std::vector<std::int64_t> resolve_annotation_indices(const std::vector<std::int64_t>& requested,
                                                     std::int64_t length) {
    std::vector<std::int64_t> out;
    for (const auto r : requested) {
        const auto t = r < 0 ? length + r : r;
        if (t < 0 || t >= length) {
            throw ConfigError({"infer.annotate"}, "annotation index " + std::to_string(r) +
                                                      " is outside a clip of " + std::to_string(length) + " frames");
        }
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<infer::ResultRecord> run_infer(const InferConfig& config, const LogFn& log) {
    const bool oracle = config.checkpoint == "oracle";
    std::shared_ptr<infer::InpaintingBackend> network;
    if (!oracle) {
        if (!std::filesystem::exists(config.checkpoint)) {
            throw IoError(config.checkpoint, "missing checkpoint");
        }
        network = std::make_shared<infer::NetworkBackend>(model::load_model(config.checkpoint));
    }
    std::vector<infer::ResultRecord> records;
    const auto emit = [&](const std::string& clip_id, const torch::Tensor& frames,
                          const infer::AnnotationSet& annotations, infer::InpaintingBackend& backend) {
        const auto result = infer::propagate(frames, annotations, backend, config.options);
        infer::write_result(config.output / clip_id, clip_id, result);
        records.push_back({clip_id, clip_id, frames.size(0), frames.size(2), frames.size(3)});
        if (log) {
            log("completed " + clip_id);
        }
    };

    if (std::filesystem::exists(config.input / data::kManifestName)) {
        const auto index = data::read_manifest(config.input);
        const auto clips = index.split(config.split);
        if (clips.empty()) {
            throw ConfigError({"infer.split"}, "no clips in split '" + config.split + "'");
        }
        for (const auto& record : clips) {
            const auto clip = data::load_clip(config.input, record);
            infer::AnnotationSet annotations;
            annotations.length = clip.length();
            if (!config.annotations.empty()) {
                annotations = infer::load_annotations(config.annotations / record.clip_id, clip.length());
            } else {
                for (const auto t : resolve_annotation_indices(config.annotate, clip.length())) {
                    annotations.masks[t] = clip.masks[t];
                }
            }
            if (oracle) {
                infer::OracleBackend backend(clip.gt_frames, clip.masks);
                emit(record.clip_id, clip.frames, annotations, backend);
            } else {
                emit(record.clip_id, clip.frames, annotations, *network);
            }
        }
    } else {
        if (oracle) {
            throw ConfigError({"infer.checkpoint"}, "the oracle backend needs a dataset input with ground truth");
        }
        if (config.annotations.empty()) {
            throw ConfigError({"infer.annotations"}, "a single clip input needs an annotation folder");
        }
        const auto frames = infer::load_clip_frames(config.input);
        const auto annotations = infer::load_annotations(config.annotations, frames.size(0));
        emit(config.input.filename().string(), frames, annotations, *network);
    }
    infer::write_result_manifest(config.output, records);
    return records;
}

eval::EvalReport run_eval(const EvalConfig& config) {
    const auto report = eval::evaluate_corpus(config.results, config.gt);
    std::filesystem::create_directories(config.output);
    const auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(path, "cannot write report");
        }
        out << text;
    };
    write(config.output / "eval.jsonl", report.to_jsonl());
    write(config.output / "eval_table.txt", report.to_table());
    return report;
}

}  // namespace svi
