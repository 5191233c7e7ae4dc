#pragma once

#include <torch/torch.h>

#include <vector>

namespace svi::model {

struct AggregationOutput {
    torch::Tensor fused;    ///< [B,C,H,W]
    torch::Tensor weights;  ///< softmax weights over references, [B,R,H,W]
};

/// Adaptive temporal aggregation. Per pixel, logits are channel dot products
/// of Q(target) and K(aligned_r); a softmax over references gives s_r, the
/// modulated features are V(aligned_r) * s_r, and a 1x1 fusion conv mixes
/// concat(h_1..h_R, target, mask).
class TemporalAggregationImpl : public torch::nn::Module {
public:
    TemporalAggregationImpl(std::int64_t channels, std::int64_t references);

    AggregationOutput forward(const torch::Tensor& target, const std::vector<torch::Tensor>& aligned,
                              const torch::Tensor& mask_feature);

    /// Softmax weights only, [B,R,H,W].
    torch::Tensor attention(const torch::Tensor& target, const std::vector<torch::Tensor>& aligned);

    std::int64_t references() const { return references_; }
    torch::nn::Conv2d& query() { return query_; }
    torch::nn::Conv2d& key() { return key_; }
    torch::nn::Conv2d& value() { return value_; }
    torch::nn::Conv2d& fusion() { return fusion_; }

private:
    std::int64_t references_;
    torch::nn::Conv2d query_{nullptr};
    torch::nn::Conv2d key_{nullptr};
    torch::nn::Conv2d value_{nullptr};
    torch::nn::Conv2d fusion_{nullptr};
};
TORCH_MODULE(TemporalAggregation);

}  // namespace svi::model
