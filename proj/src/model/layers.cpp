#include "svi/model/layers.hpp"

namespace svi::model {

namespace F = torch::nn::functional;

torch::nn::Conv2dOptions conv3x3(std::int64_t in, std::int64_t out, std::int64_t stride) {
    return torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1);
}

torch::nn::Conv2dOptions conv1x1(std::int64_t in, std::int64_t out) {
    return torch::nn::Conv2dOptions(in, out, 1);
}

ResidualBlockImpl::ResidualBlockImpl(std::int64_t channels)
    : conv1_(register_module("conv1", torch::nn::Conv2d(conv3x3(channels, channels)))),
      conv2_(register_module("conv2", torch::nn::Conv2d(conv3x3(channels, channels)))) {}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
    return x + conv2_(torch::relu(conv1_(x)));
}

FrameEncoderImpl::FrameEncoderImpl(std::int64_t in_channels, std::int64_t channels,
                                   std::int64_t residual_blocks) {
    const auto half = std::max<std::int64_t>(channels / 2, 1);
    stem_ = register_module("stem", torch::nn::Conv2d(conv3x3(in_channels, half)));
    down1_ = register_module("down1", torch::nn::Conv2d(conv3x3(half, channels, 2)));
    down2_ = register_module("down2", torch::nn::Conv2d(conv3x3(channels, channels, 2)));
    trunk_ = torch::nn::Sequential();
    for (std::int64_t i = 0; i < residual_blocks; ++i) {
        trunk_->push_back(ResidualBlock(channels));
    }
    register_module("trunk", trunk_);
}

torch::Tensor FrameEncoderImpl::forward(const torch::Tensor& frame) {
    TORCH_CHECK(frame.size(-1) % kFeatureStride == 0 && frame.size(-2) % kFeatureStride == 0,
                "encoder input must be padded to a multiple of 4, got ", frame.sizes());
    auto x = torch::relu(stem_(frame));
    x = torch::relu(down1_(x));
    x = down2_(x);
    if (!trunk_->is_empty()) {
        x = trunk_->forward(x);
    }
    return x;
}

FeatureDecoderImpl::FeatureDecoderImpl(std::int64_t in_channels, std::int64_t channels,
                                       std::int64_t out_channels, std::int64_t residual_blocks) {
    const auto half = std::max<std::int64_t>(channels / 2, 1);
    input_ = register_module("input", torch::nn::Conv2d(conv3x3(in_channels, channels)));
    trunk_ = torch::nn::Sequential();
    for (std::int64_t i = 0; i < residual_blocks; ++i) {
        trunk_->push_back(ResidualBlock(channels));
    }
    register_module("trunk", trunk_);
    up1_ = register_module("up1", torch::nn::Conv2d(conv3x3(channels, half)));
    up2_ = register_module("up2", torch::nn::Conv2d(conv3x3(half, half)));
    head_ = register_module("head", torch::nn::Conv2d(conv3x3(half, out_channels)));
}

torch::Tensor FeatureDecoderImpl::forward(const torch::Tensor& feature) {
    auto upsample = [](const torch::Tensor& t) {
        return F::interpolate(t, F::InterpolateFuncOptions()
                                     .scale_factor(std::vector<double>{2.0, 2.0})
                                     .mode(torch::kNearest));
    };
    auto x = torch::relu(input_(feature));
    if (!trunk_->is_empty()) {
        x = trunk_->forward(x);
    }
    x = torch::relu(up1_(upsample(x)));
    x = torch::relu(up2_(upsample(x)));
    return head_(x);
}

}  // namespace svi::model
