#include "svi/data/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svi::data {

namespace F = torch::nn::functional;

void SourceClip::validate() const {
    if (!frames.defined() || frames.dim() != 4 || frames.size(1) != 3) {
        throw std::invalid_argument("source clip " + clip_id + ": frames must be [T,3,H,W]");
    }
    if (frames.size(0) < 2) {
        throw std::invalid_argument("source clip " + clip_id + ": needs at least 2 frames");
    }
    if (!(fps > 0.0)) {
        throw std::invalid_argument("source clip " + clip_id + ": fps must be positive");
    }
}

void MotionJitter::validate() const {
    if (max_translation < 0.0 || max_rotation_deg < 0.0) {
        throw std::invalid_argument("jitter: magnitudes must be >= 0");
    }
    const double step_x = std::abs(drift.x) + max_translation;
    const double step_y = std::abs(drift.y) + max_translation;
    if (step_x > kTranslationLimit || step_y > kTranslationLimit) {
        throw std::invalid_argument("jitter: per-frame translation may not exceed 3 px");
    }
    if (std::abs(rotation_drift_deg) + max_rotation_deg > kRotationLimitDeg) {
        throw std::invalid_argument("jitter: per-frame rotation may not exceed 2 degrees");
    }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Point2 stroke_centroid(const StrokeSet& strokes) {
    Point2 c;
    std::size_t n = 0;
    for (const auto& s : strokes) {
        for (const auto& p : s.vertices) {
            c.x += p.x;
            c.y += p.y;
            ++n;
        }
    }
    if (n > 0) {
        c.x /= static_cast<double>(n);
        c.y /= static_cast<double>(n);
    }
    return c;
}

StrokeSet transform_strokes(const StrokeSet& strokes, const Pose& pose, Point2 pivot) {
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    StrokeSet out = strokes;
    for (auto& stroke : out) {
        for (auto& p : stroke.vertices) {
            const double dx = p.x - pivot.x;
            const double dy = p.y - pivot.y;
            p.x = pivot.x + c * dx - s * dy + pose.tx;
            p.y = pivot.y + s * dx + c * dy + pose.ty;
        }
    }
    return out;
}

std::vector<Pose> sample_trajectory(std::int64_t length, const MotionJitter& jitter,
                                    std::mt19937_64& rng) {
    jitter.validate();
    constexpr double kDeg = std::numbers::pi / 180.0;
    auto uniform = [&rng](double half) {
        return half > 0.0 ? std::uniform_real_distribution<double>(-half, half)(rng) : 0.0;
    };
    std::vector<Pose> poses(static_cast<std::size_t>(length));
    for (std::size_t i = 1; i < poses.size(); ++i) {
        const double step_x = jitter.drift.x + uniform(jitter.max_translation);
        const double step_y = jitter.drift.y + uniform(jitter.max_translation);
        const double step_r = (jitter.rotation_drift_deg + uniform(jitter.max_rotation_deg)) * kDeg;
        poses[i] = {poses[i - 1].tx + step_x, poses[i - 1].ty + step_y, poses[i - 1].theta + step_r};
    }
    return poses;
}

torch::Tensor fit_patch(const torch::Tensor& image, std::int64_t height, std::int64_t width) {
    TORCH_CHECK(image.dim() == 3 && image.size(0) == 3, "expected a [3,H,W] patch, got ", image.sizes());
    const auto ih = image.size(1);
    const auto iw = image.size(2);
    // Largest centred window with the target aspect ratio.
    std::int64_t ch = ih;
    std::int64_t cw = ih * width / height;
    if (cw > iw) {
        cw = iw;
        ch = iw * height / width;
    }
    const auto top = (ih - ch) / 2;
    const auto left = (iw - cw) / 2;
    auto crop = image.slice(1, top, top + ch).slice(2, left, left + cw);
    if (ch == height && cw == width) {
        return crop.contiguous();
    }
    return F::interpolate(crop.unsqueeze(0), F::InterpolateFuncOptions()
                                                 .size(std::vector<std::int64_t>{height, width})
                                                 .mode(torch::kArea))
        .squeeze(0)
        .clamp(0.0, 1.0);
}

CorruptedClip synthesize_clip(const SourceClip& src, const NoiseBank& bank, const StrokeSpec& stroke,
                              const SmoothSpec& smooth, const MotionJitter& jitter,
                              std::uint64_t seed, int max_attempts) {
    src.validate();
    stroke.validate();
    smooth.validate();
    jitter.validate();
    if (bank.patches.empty() || bank.patches.size() != bank.source_ids.size()) {
        throw std::invalid_argument("noise bank is empty or has mismatched ids");
    }
    const auto length = src.length();
    const auto height = src.frames.size(2);
    const auto width = src.frames.size(3);

    ClipProvenance prov;
    prov.clip_id = src.clip_id;
    prov.seed = seed;
    prov.stroke_seed = derive_seed(seed, 1);
    prov.jitter_seed = derive_seed(seed, 2);
    prov.noise_seed = derive_seed(seed, 3);

    // Pick a patch that does not come from the clip being corrupted.
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < bank.source_ids.size(); ++i) {
        if (bank.source_ids[i] != src.clip_id) {
            eligible.push_back(i);
        }
    }
    if (eligible.empty()) {
        throw std::invalid_argument("noise bank has no patch disjoint from clip " + src.clip_id);
    }
    std::mt19937_64 noise_rng(prov.noise_seed);
    const auto pick = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(noise_rng)];
    prov.noise_id = bank.source_ids[pick];
    const auto noise = fit_patch(bank.patches[pick], height, width).to(torch::kFloat32);

    std::mt19937_64 stroke_rng(prov.stroke_seed);
    std::mt19937_64 jitter_rng(prov.jitter_seed);
    std::vector<torch::Tensor> masks;
    bool accepted = false;
    for (int attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
        const auto strokes = sample_strokes(height, width, stroke, stroke_rng);
        const auto pivot = stroke_centroid(strokes);
        const auto poses = sample_trajectory(length, jitter, jitter_rng);
        masks.clear();
        accepted = true;
        for (const auto& pose : poses) {
            auto mask = rasterize_strokes(transform_strokes(strokes, pose, pivot), height, width);
            if (!coverage_ok(coverage(mask))) {
                accepted = false;
                break;
            }
            masks.push_back(std::move(mask));
        }
    }
    if (!accepted) {
        throw std::runtime_error("clip " + src.clip_id +
                                 ": stroke spec cannot satisfy the coverage bound [0.5%, 40%] within " +
                                 std::to_string(max_attempts) + " attempts");
    }

    CorruptedClip out;
    out.gt_frames = src.frames.to(torch::kFloat32).contiguous();
    out.masks = torch::stack(masks);
    std::vector<torch::Tensor> alphas;
    std::vector<torch::Tensor> frames;
    for (std::int64_t t = 0; t < length; ++t) {
        auto alpha = extend_mask_alpha(masks[static_cast<std::size_t>(t)], smooth);
        frames.push_back(composite_frame(out.gt_frames[t], noise, alpha));
        alphas.push_back(std::move(alpha));
    }
    out.frames = torch::stack(frames);
    out.alphas = torch::stack(alphas);
    out.provenance = std::move(prov);
    return out;
}

}  // namespace svi::data
