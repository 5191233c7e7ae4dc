#pragma once

#include "svi/data/procedural.hpp"
#include "svi/data/synth.hpp"
#include "svi/model/networks.hpp"

#include <torch/torch.h>

#include <filesystem>
#include <random>
#include <string>

namespace svi::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "svi") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Clip whose alpha equals the binary mask, so x == y outside the mask and
/// x == u inside it, exactly.
inline data::CorruptedClip hard_clip(const std::string& id, std::int64_t length, std::int64_t size,
                                     std::uint64_t seed) {
    const auto src = data::make_procedural_clip(id, length, size, size, seed);
    const auto bank = data::make_procedural_noise_bank(1, size, size, seed + 1);
    std::mt19937_64 rng(seed + 2);
    auto spec = data::StrokeSpec{}.scaled_to(size, size);
    const auto mask0 = data::generate_stroke_mask(size, size, spec, rng);
    data::CorruptedClip clip;
    clip.gt_frames = src.frames;
    std::vector<torch::Tensor> masks;
    std::vector<torch::Tensor> frames;
    for (std::int64_t t = 0; t < length; ++t) {
        // one pixel of horizontal drift per frame, wrapping around
        auto m = torch::roll(mask0, {t}, {2});
        frames.push_back(data::composite_frame(src.frames[t], bank.patches[0], m));
        masks.push_back(m);
    }
    clip.masks = torch::stack(masks);
    clip.alphas = clip.masks.clone();
    clip.frames = torch::stack(frames);
    clip.provenance.clip_id = id;
    clip.provenance.noise_id = bank.source_ids[0];
    clip.provenance.seed = seed;
    return clip;
}

inline model::ModelConfig tiny_config(std::int64_t channels = 8, std::int64_t blocks = 1) {
    model::ModelConfig c;
    c.channels = channels;
    c.reference_radius = 1;
    c.dca_blocks = blocks;
    c.encoder_blocks = 1;
    c.decoder_blocks = 1;
    return c;
}

}  // namespace svi::test
