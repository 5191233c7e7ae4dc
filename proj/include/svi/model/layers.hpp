#pragma once

#include <torch/torch.h>

namespace svi::model {

/// Feature maps live at 1/4 of the frame resolution.
inline constexpr std::int64_t kFeatureStride = 4;

class ResidualBlockImpl : public torch::nn::Module {
public:
    explicit ResidualBlockImpl(std::int64_t channels);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Conv2d conv1_{nullptr};
    torch::nn::Conv2d conv2_{nullptr};
};
TORCH_MODULE(ResidualBlock);

/// Frame-level encoder: a full-resolution stem, two stride-2 stages and a
/// residual trunk. [B,in,H,W] -> [B,C,H/4,W/4]; H and W must be multiples of 4.
class FrameEncoderImpl : public torch::nn::Module {
public:
    FrameEncoderImpl(std::int64_t in_channels, std::int64_t channels, std::int64_t residual_blocks);
    torch::Tensor forward(const torch::Tensor& frame);

    /// Last layer of the trunk (the second down-sampling conv).
    torch::nn::Conv2d& last_conv() { return down2_; }

private:
    torch::nn::Conv2d stem_{nullptr};
    torch::nn::Conv2d down1_{nullptr};
    torch::nn::Conv2d down2_{nullptr};
    torch::nn::Sequential trunk_{nullptr};
};
TORCH_MODULE(FrameEncoder);

/// Mirror of the encoder: optional input projection, residual blocks and two
/// nearest-neighbour upsample + conv stages. Returns pre-activation logits at
/// 4x the input resolution.
class FeatureDecoderImpl : public torch::nn::Module {
public:
    FeatureDecoderImpl(std::int64_t in_channels, std::int64_t channels, std::int64_t out_channels,
                       std::int64_t residual_blocks);
    torch::Tensor forward(const torch::Tensor& feature);

    torch::nn::Conv2d& head() { return head_; }

private:
    torch::nn::Conv2d input_{nullptr};
    torch::nn::Sequential trunk_{nullptr};
    torch::nn::Conv2d up1_{nullptr};
    torch::nn::Conv2d up2_{nullptr};
    torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(FeatureDecoder);

torch::nn::Conv2dOptions conv3x3(std::int64_t in, std::int64_t out, std::int64_t stride = 1);
torch::nn::Conv2dOptions conv1x1(std::int64_t in, std::int64_t out);

}  // namespace svi::model
