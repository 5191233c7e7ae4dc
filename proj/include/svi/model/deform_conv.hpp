#pragma once

#include <torch/torch.h>

namespace svi::model {

/// 3x3 kernel grid; tap n = (ky + 1) * 3 + (kx + 1) for ky, kx in {-1, 0, 1}.
inline constexpr std::int64_t kTaps = 9;

/// Bilinear lookup of `feature` [B,C,H,W] at fractional positions `x`, `y`
/// (both [B,K,Ho,Wo], pixel units). Neighbours outside the grid contribute
/// zero. Differentiable w.r.t. the feature and the positions.
/// Returns [B,C,K,Ho,Wo].
torch::Tensor bilinear_gather(const torch::Tensor& feature, const torch::Tensor& x,
                              const torch::Tensor& y);

/// Single-location convenience form: `feature` is [C,H,W]; returns [C].
torch::Tensor bilinear_sample(const torch::Tensor& feature, double x, double y);

/// Deformable convolution (no modulation), stride 1, padding 1.
///
/// `offsets` is [B,18,H,W] holding (dx, dy) for every tap in tap order, so
/// the output at p sums w_n * source(p + R_n + offset_n) over the nine taps.
/// `weight` is [Cout,Cin,3,3]; `bias` is optional [Cout].
torch::Tensor deform_conv2d(const torch::Tensor& source, const torch::Tensor& offsets,
                            const torch::Tensor& weight, const torch::Tensor& bias = {});

}  // namespace svi::model
