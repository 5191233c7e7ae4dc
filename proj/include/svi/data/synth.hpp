#pragma once

#include "svi/data/alpha.hpp"
#include "svi/data/stroke.hpp"

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <vector>

namespace svi::data {

/// Ground-truth clip. `frames` is [T,3,H,W] in [0,1].
struct SourceClip {
    std::string clip_id;
    torch::Tensor frames;
    double fps = 24.0;

    void validate() const;
    std::int64_t length() const { return frames.size(0); }
};

/// Natural-image patches used as the corrupting content. Patches are [3,H,W].
struct NoiseBank {
    std::vector<torch::Tensor> patches;
    std::vector<std::string> source_ids;
};

/// Per-frame random walk applied to the stroke geometry. Each step draws a
/// translation uniformly from drift +/- max_translation (per axis) and a
/// rotation about the frame-0 stroke centroid from rotation_drift +/- max_rotation.
struct MotionJitter {
    static constexpr double kTranslationLimit = 3.0;
    static constexpr double kRotationLimitDeg = 2.0;

    double max_translation = 1.5;
    double max_rotation_deg = 1.0;
    Point2 drift{0.0, 0.0};
    double rotation_drift_deg = 0.0;

    void validate() const;
    static MotionJitter none() { return {0.0, 0.0, {0.0, 0.0}, 0.0}; }
};

struct Pose {
    double tx = 0.0;
    double ty = 0.0;
    double theta = 0.0;
};

/// Provenance for one synthesized clip.
struct ClipProvenance {
    std::string clip_id;
    std::string noise_id;
    std::uint64_t seed = 0;
    std::uint64_t stroke_seed = 0;
    std::uint64_t jitter_seed = 0;
    std::uint64_t noise_seed = 0;

    bool operator==(const ClipProvenance&) const = default;
};

struct CorruptedClip {
    torch::Tensor frames;     ///< x_i, [T,3,H,W]
    torch::Tensor gt_frames;  ///< y_i, [T,3,H,W]
    torch::Tensor masks;      ///< binary m_i, [T,1,H,W]
    torch::Tensor alphas;     ///< soft blend weights, [T,1,H,W]
    ClipProvenance provenance;

    std::int64_t length() const { return frames.size(0); }
    std::int64_t height() const { return frames.size(2); }
    std::int64_t width() const { return frames.size(3); }
};

/// Independent sub-stream seed derived from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

StrokeSet transform_strokes(const StrokeSet& strokes, const Pose& pose, Point2 pivot);
Point2 stroke_centroid(const StrokeSet& strokes);

/// Cumulative poses for `length` frames; pose 0 is the identity.
std::vector<Pose> sample_trajectory(std::int64_t length, const MotionJitter& jitter,
                                    std::mt19937_64& rng);

/// Deterministic center crop to the target aspect ratio followed by an area resize.
torch::Tensor fit_patch(const torch::Tensor& image, std::int64_t height, std::int64_t width);

/// Corrupts `src` with one stroke-mask trajectory and one noise patch.
/// `stroke` is used as given (call scaled_to first for non-reference sizes).
CorruptedClip synthesize_clip(const SourceClip& src, const NoiseBank& bank, const StrokeSpec& stroke,
                              const SmoothSpec& smooth, const MotionJitter& jitter,
                              std::uint64_t seed, int max_attempts = 200);

}  // namespace svi::data
