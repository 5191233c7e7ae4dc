#include "svi/model/alignment.hpp"

#include "svi/model/deform_conv.hpp"
#include "svi/model/layers.hpp"

namespace svi::model {

DcaBlockImpl::DcaBlockImpl(std::int64_t channels) {
    offset_hidden_ = register_module("offset_hidden", torch::nn::Conv2d(conv3x3(2 * channels, channels)));
    offset_out_ = register_module("offset_out", torch::nn::Conv2d(conv3x3(channels, 2 * kTaps)));
    {
        torch::NoGradGuard no_grad;
        offset_out_->weight.zero_();
        offset_out_->bias.zero_();
    }
    auto identity = torch::zeros({channels, channels, 3, 3});
    for (std::int64_t c = 0; c < channels; ++c) {
        identity[c][c][1][1] = 1.0;
    }
    kernel_ = register_parameter("kernel", identity);
    kernel_bias_ = register_parameter("kernel_bias", torch::zeros({channels}));
}

torch::Tensor DcaBlockImpl::predict_offsets(const torch::Tensor& source, const torch::Tensor& target) {
    TORCH_CHECK(source.sizes() == target.sizes(), "DCA source/target shape mismatch: ",
                source.sizes(), " vs ", target.sizes());
    const auto hidden = torch::relu(offset_hidden_(torch::cat({target, source}, 1)));
    const double limit = static_cast<double>(std::max(source.size(2), source.size(3)));
    return offset_out_(hidden).clamp(-limit, limit);
}

torch::Tensor DcaBlockImpl::forward(const torch::Tensor& source, const torch::Tensor& target) {
    return deform_conv2d(source, predict_offsets(source, target), kernel_, kernel_bias_);
}

FeatureAlignmentImpl::FeatureAlignmentImpl(std::int64_t channels, std::int64_t blocks) {
    TORCH_CHECK(blocks >= 0, "block count must be >= 0");
    for (std::int64_t i = 0; i < blocks; ++i) {
        blocks_.push_back(register_module("block" + std::to_string(i), DcaBlock(channels)));
    }
}

torch::Tensor FeatureAlignmentImpl::forward(const torch::Tensor& source, const torch::Tensor& target) {
    TORCH_CHECK(source.sizes() == target.sizes(), "alignment source/target shape mismatch: ",
                source.sizes(), " vs ", target.sizes());
    auto aligned = source;
    for (auto& block : blocks_) {
        aligned = block->forward(aligned, target);
    }
    return aligned;
}

}  // namespace svi::model
