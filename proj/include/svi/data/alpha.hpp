#pragma once

#include <torch/torch.h>

namespace svi::data {

struct SmoothSpec {
    int iterations = 4;
    int kernel_radius = 2;
    double kernel_sigma = 1.0;

    void validate() const;
};

/// Normalized 1-D Gaussian taps over [-radius, radius], float64.
torch::Tensor gaussian_kernel1d(int radius, double sigma);

/// Iterative Gaussian smoothing of a binary [1,H,W] mask into a soft alpha.
/// Each pass blurs (zero padding) and then re-imposes 1 on the original support.
/// The result is finally capped so alpha never increases between neighbouring
/// pixels as the Euclidean distance to the support grows.
torch::Tensor extend_mask_alpha(const torch::Tensor& mask, const SmoothSpec& spec);

/// x = (1 - alpha) * y + alpha * u, clamped to [0, 1].
torch::Tensor composite_frame(const torch::Tensor& clean, const torch::Tensor& noise,
                              const torch::Tensor& alpha);

}  // namespace svi::data
