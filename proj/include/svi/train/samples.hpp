#pragma once

#include "svi/data/synth.hpp"

#include <torch/torch.h>

#include <cstdint>
#include <random>
#include <vector>

namespace svi::train {

/// Frame window indices t-n..t-1, t+1..t+n clamped into [0, length).
std::vector<std::int64_t> reference_indices(std::int64_t t, std::int64_t radius, std::int64_t length);

/// Identifies one training example: target frame `t` of clip `clip` whose
/// mask predictor is also supervised on frame `t + step` (step = +1 or -1).
struct SampleKey {
    std::size_t clip = 0;
    std::int64_t t = 0;
    std::int64_t step = 1;
};

/// Every (clip, t, direction) with an in-range neighbour, in a fixed order.
std::vector<SampleKey> enumerate_samples(const std::vector<data::CorruptedClip>& clips);

/// A batch of training examples; frames are [B,3,H,W], masks [B,1,H,W].
struct Batch {
    torch::Tensor target;                  ///< x_t
    std::vector<torch::Tensor> references; ///< X_r, one tensor per window slot
    torch::Tensor gt;                      ///< y_t
    torch::Tensor mask;                    ///< m_t
    torch::Tensor next_frame;              ///< x_{t+1} (or x_{t-1})
    torch::Tensor next_gt;                 ///< y_{t+1}
    torch::Tensor next_mask;               ///< m_{t+1}

    Batch to(torch::ScalarType dtype) const;
};

/// Gathers the keyed samples. When `crop` is smaller than the frames, a crop
/// window drawn from `rng` is applied consistently to every tensor of a sample.
Batch make_batch(const std::vector<data::CorruptedClip>& clips, const std::vector<SampleKey>& keys,
                 std::int64_t radius, std::int64_t crop, std::mt19937_64& rng);

}  // namespace svi::train
