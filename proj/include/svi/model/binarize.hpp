#pragma once

#include <torch/torch.h>

namespace svi::model {

inline constexpr double kDefaultMaskThreshold = 0.5;

/// value >= threshold -> 1, else 0. Same dtype as the input.
torch::Tensor binarize_mask(const torch::Tensor& soft, double threshold = kDefaultMaskThreshold);

/// Hard forward value, identity gradient.
torch::Tensor straight_through_binarize(const torch::Tensor& soft,
                                        double threshold = kDefaultMaskThreshold);

}  // namespace svi::model
