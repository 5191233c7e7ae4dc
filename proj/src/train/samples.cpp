#include "svi/train/samples.hpp"

#include <algorithm>

namespace svi::train {

std::vector<std::int64_t> reference_indices(std::int64_t t, std::int64_t radius, std::int64_t length) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = -radius; d <= radius; ++d) {
        if (d != 0) {
            out.push_back(std::clamp<std::int64_t>(t + d, 0, length - 1));
        }
    }
    return out;
}

std::vector<SampleKey> enumerate_samples(const std::vector<data::CorruptedClip>& clips) {
    std::vector<SampleKey> keys;
    for (std::size_t c = 0; c < clips.size(); ++c) {
        const auto length = clips[c].length();
        for (std::int64_t t = 0; t < length; ++t) {
            if (t + 1 < length) {
                keys.push_back({c, t, 1});
            }
            if (t - 1 >= 0) {
                keys.push_back({c, t, -1});
            }
        }
    }
    return keys;
}

Batch Batch::to(torch::ScalarType dtype) const {
    Batch b;
    b.target = target.to(dtype);
    for (const auto& r : references) {
        b.references.push_back(r.to(dtype));
    }
    b.gt = gt.to(dtype);
    b.mask = mask.to(dtype);
    b.next_frame = next_frame.to(dtype);
    b.next_gt = next_gt.to(dtype);
    b.next_mask = next_mask.to(dtype);
    return b;
}

Batch make_batch(const std::vector<data::CorruptedClip>& clips, const std::vector<SampleKey>& keys,
                 std::int64_t radius, std::int64_t crop, std::mt19937_64& rng) {
    TORCH_CHECK(!keys.empty(), "cannot build an empty batch");
    std::vector<torch::Tensor> target, gt, mask, next_frame, next_gt, next_mask;
    std::vector<std::vector<torch::Tensor>> refs(static_cast<std::size_t>(2 * radius));
    for (const auto& key : keys) {
        const auto& clip = clips.at(key.clip);
        const auto h = clip.height();
        const auto w = clip.width();
        const auto ch = std::min(crop, h);
        const auto cw = std::min(crop, w);
        const auto top = ch < h ? std::uniform_int_distribution<std::int64_t>(0, h - ch)(rng) : 0;
        const auto left = cw < w ? std::uniform_int_distribution<std::int64_t>(0, w - cw)(rng) : 0;
        auto cut = [&](const torch::Tensor& t) {
            return t.slice(1, top, top + ch).slice(2, left, left + cw);
        };
        const auto n = key.t + key.step;
        target.push_back(cut(clip.frames[key.t]));
        gt.push_back(cut(clip.gt_frames[key.t]));
        mask.push_back(cut(clip.masks[key.t]));
        next_frame.push_back(cut(clip.frames[n]));
        next_gt.push_back(cut(clip.gt_frames[n]));
        next_mask.push_back(cut(clip.masks[n]));
        const auto ids = reference_indices(key.t, radius, clip.length());
        for (std::size_t r = 0; r < ids.size(); ++r) {
            refs[r].push_back(cut(clip.frames[ids[r]]));
        }
    }
    Batch b;
    b.target = torch::stack(target);
    b.gt = torch::stack(gt);
    b.mask = torch::stack(mask);
    b.next_frame = torch::stack(next_frame);
    b.next_gt = torch::stack(next_gt);
    b.next_mask = torch::stack(next_mask);
    for (auto& r : refs) {
        b.references.push_back(torch::stack(r));
    }
    return b;
}

}  // namespace svi::train
