#pragma once

#include "svi/model/aggregation.hpp"
#include "svi/model/alignment.hpp"
#include "svi/model/layers.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <vector>

namespace svi::model {

struct ModelConfig {
    std::int64_t channels = 32;
    /// n: the window holds frames t-n..t-1 and t+1..t+n.
    std::int64_t reference_radius = 1;
    std::int64_t dca_blocks = 4;
    std::int64_t encoder_blocks = 4;
    std::int64_t decoder_blocks = 2;

    std::int64_t references() const { return 2 * reference_radius; }
    void validate() const;

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
    bool operator==(const ModelConfig&) const = default;
};

/// Replicate-pads [B,C,H,W] frames so H and W become multiples of 4.
torch::Tensor pad_frame(const torch::Tensor& frame);
/// Zero-pads a [B,1,H,W] mask and area-downsamples it to the feature grid.
torch::Tensor mask_to_feature(const torch::Tensor& mask);

/// Everything of the completion pass that does not depend on the mask.
struct CompletionContext {
    torch::Tensor target_feature;
    std::vector<torch::Tensor> aligned;
    std::int64_t height = 0;
    std::int64_t width = 0;
};

struct CompletionOutput {
    torch::Tensor completed;  ///< paste-back composite, [B,3,H,W]
    torch::Tensor decoded;    ///< raw decoder output, [B,3,H,W]
    torch::Tensor feature;    ///< aggregated feature f^_t, [B,C,H/4,W/4]
    torch::Tensor weights;    ///< aggregation weights, [B,R,H/4,W/4]
};

/// Completion network: encode, align every reference against the target,
/// aggregate, decode and paste known pixels back.
class CompletionNetworkImpl : public torch::nn::Module {
public:
    CompletionNetworkImpl(const ModelConfig& config, FeatureAlignment alignment);

    torch::Tensor encode(const torch::Tensor& frame);
    CompletionContext prepare(const std::vector<torch::Tensor>& references, const torch::Tensor& target);
    CompletionOutput complete(const CompletionContext& context, const torch::Tensor& target,
                              const torch::Tensor& mask);
    CompletionOutput forward(const std::vector<torch::Tensor>& references, const torch::Tensor& target,
                             const torch::Tensor& mask);

    /// Sigmoid-bounded frame at the padded resolution, cropped to height x width.
    torch::Tensor decode(const torch::Tensor& feature, std::int64_t height, std::int64_t width);

    FeatureAlignment& alignment() { return alignment_; }
    TemporalAggregation& aggregation() { return aggregation_; }
    FrameEncoder& encoder() { return encoder_; }
    FeatureDecoder& decoder() { return decoder_; }

private:
    FeatureAlignment alignment_;  // owned by the joint model, not registered here
    FrameEncoder encoder_{nullptr};
    TemporalAggregation aggregation_{nullptr};
    FeatureDecoder decoder_{nullptr};
};
TORCH_MODULE(CompletionNetwork);

/// Mask prediction network. The first argument is always the query frame
/// whose corruption mask is produced; `completed` and `completed_feature`
/// come from the completion pass of a neighbouring (or the same) frame.
class MaskPredictionNetworkImpl : public torch::nn::Module {
public:
    MaskPredictionNetworkImpl(const ModelConfig& config, FeatureAlignment alignment);

    torch::Tensor logits(const torch::Tensor& query, const torch::Tensor& completed,
                         const torch::Tensor& completed_feature);
    /// Soft mask in [0,1], [B,1,H,W].
    torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& completed,
                          const torch::Tensor& completed_feature);

    FeatureAlignment& alignment() { return alignment_; }
    FrameEncoder& encoder() { return encoder_; }
    torch::nn::Conv2d& projection() { return projection_; }
    FeatureDecoder& decoder() { return decoder_; }

private:
    FeatureAlignment alignment_;  // shared with the completion network
    FrameEncoder encoder_{nullptr};
    torch::nn::Conv2d projection_{nullptr};
    FeatureDecoder decoder_{nullptr};
};
TORCH_MODULE(MaskPredictionNetwork);

/// Both networks plus the single alignment module they share.
class InpaintingModelImpl : public torch::nn::Module {
public:
    explicit InpaintingModelImpl(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    FeatureAlignment& alignment() { return alignment_; }
    CompletionNetwork& completion() { return completion_; }
    MaskPredictionNetwork& mask_prediction() { return mask_prediction_; }

private:
    ModelConfig config_;
    FeatureAlignment alignment_{nullptr};
    CompletionNetwork completion_{nullptr};
    MaskPredictionNetwork mask_prediction_{nullptr};
};
TORCH_MODULE(InpaintingModel);

}  // namespace svi::model
