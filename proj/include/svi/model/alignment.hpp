#pragma once

#include <torch/torch.h>

#include <vector>

namespace svi::model {

/// Deformable-convolution alignment block.
///
/// Predicts per-tap sampling offsets from concat(target, source) with two 3x3
/// convolutions (the second zero-initialised so a fresh block is a plain 3x3
/// convolution), clamps them to max(H, W) and resamples `source` with a
/// deformable convolution. The deformable kernel starts as the identity.
class DcaBlockImpl : public torch::nn::Module {
public:
    explicit DcaBlockImpl(std::int64_t channels);

    torch::Tensor predict_offsets(const torch::Tensor& source, const torch::Tensor& target);
    torch::Tensor forward(const torch::Tensor& source, const torch::Tensor& target);

    torch::nn::Conv2d& offset_hidden() { return offset_hidden_; }
    torch::nn::Conv2d& offset_out() { return offset_out_; }
    torch::Tensor& kernel() { return kernel_; }
    torch::Tensor& kernel_bias() { return kernel_bias_; }

private:
    torch::nn::Conv2d offset_hidden_{nullptr};
    torch::nn::Conv2d offset_out_{nullptr};
    torch::Tensor kernel_;
    torch::Tensor kernel_bias_;
};
TORCH_MODULE(DcaBlock);

/// Cascade of DCA blocks. Every block re-predicts offsets against the same
/// target from the previous block's output. An empty cascade returns the source.
class FeatureAlignmentImpl : public torch::nn::Module {
public:
    FeatureAlignmentImpl(std::int64_t channels, std::int64_t blocks);

    torch::Tensor forward(const torch::Tensor& source, const torch::Tensor& target);

    std::size_t size() const { return blocks_.size(); }
    DcaBlock& block(std::size_t i) { return blocks_.at(i); }

private:
    std::vector<DcaBlock> blocks_;
};
TORCH_MODULE(FeatureAlignment);

}  // namespace svi::model
