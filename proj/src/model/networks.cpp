#include "svi/model/networks.hpp"

#include <cmath>
#include <stdexcept>

namespace svi::model {

namespace F = torch::nn::functional;

namespace {

std::int64_t padded(std::int64_t n) {
    return (n + kFeatureStride - 1) / kFeatureStride * kFeatureStride;
}

}  // namespace

void ModelConfig::validate() const {
    std::vector<std::string> bad;
    if (channels < 2 || channels % 2 != 0) {
        bad.emplace_back("model.channels");
    }
    if (reference_radius < 1) {
        bad.emplace_back("model.reference_radius");
    }
    if (dca_blocks < 0 || dca_blocks > 6) {
        bad.emplace_back("model.dca_blocks");
    }
    if (encoder_blocks < 0) {
        bad.emplace_back("model.encoder_blocks");
    }
    if (decoder_blocks < 0) {
        bad.emplace_back("model.decoder_blocks");
    }
    if (!bad.empty()) {
        std::string msg = "invalid model configuration:";
        for (const auto& k : bad) {
            msg += " " + k;
        }
        throw std::invalid_argument(msg);
    }
}

nlohmann::json ModelConfig::to_json() const {
    return {{"channels", channels},
            {"reference_radius", reference_radius},
            {"dca_blocks", dca_blocks},
            {"encoder_blocks", encoder_blocks},
            {"decoder_blocks", decoder_blocks}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.channels = j.value("channels", c.channels);
    c.reference_radius = j.value("reference_radius", c.reference_radius);
    c.dca_blocks = j.value("dca_blocks", c.dca_blocks);
    c.encoder_blocks = j.value("encoder_blocks", c.encoder_blocks);
    c.decoder_blocks = j.value("decoder_blocks", c.decoder_blocks);
    return c;
}

torch::Tensor pad_frame(const torch::Tensor& frame) {
    const auto h = frame.size(2);
    const auto w = frame.size(3);
    if (padded(h) == h && padded(w) == w) {
        return frame;
    }
    return F::pad(frame, F::PadFuncOptions({0, padded(w) - w, 0, padded(h) - h}).mode(torch::kReplicate));
}

torch::Tensor mask_to_feature(const torch::Tensor& mask) {
    const auto h = mask.size(2);
    const auto w = mask.size(3);
    auto m = mask;
    if (padded(h) != h || padded(w) != w) {
        m = F::pad(mask, F::PadFuncOptions({0, padded(w) - w, 0, padded(h) - h}));
    }
    return F::avg_pool2d(m, F::AvgPool2dFuncOptions(kFeatureStride));
}

CompletionNetworkImpl::CompletionNetworkImpl(const ModelConfig& config, FeatureAlignment alignment)
    : alignment_(std::move(alignment)) {
    config.validate();
    encoder_ = register_module("encoder", FrameEncoder(3, config.channels, config.encoder_blocks));
    aggregation_ = register_module("aggregation", TemporalAggregation(config.channels, config.references()));
    decoder_ = register_module("decoder", FeatureDecoder(config.channels, config.channels, 3, config.decoder_blocks));
}

torch::Tensor CompletionNetworkImpl::encode(const torch::Tensor& frame) {
    TORCH_CHECK(frame.dim() == 4 && frame.size(1) == 3, "frames must be [B,3,H,W], got ", frame.sizes());
    TORCH_CHECK(torch::isfinite(frame).all().item<bool>(), "non-finite values in encoder input");
    return encoder_(pad_frame(frame));
}

CompletionContext CompletionNetworkImpl::prepare(const std::vector<torch::Tensor>& references,
                                                 const torch::Tensor& target) {
    TORCH_CHECK(!references.empty(), "completion needs at least one reference frame");
    CompletionContext ctx;
    ctx.height = target.size(2);
    ctx.width = target.size(3);
    ctx.target_feature = encode(target);
    ctx.aligned.reserve(references.size());
    for (const auto& ref : references) {
        TORCH_CHECK(ref.sizes() == target.sizes(), "reference shape ", ref.sizes(),
                    " differs from target ", target.sizes());
        ctx.aligned.push_back(alignment_->forward(encode(ref), ctx.target_feature));
    }
    return ctx;
}

CompletionOutput CompletionNetworkImpl::complete(const CompletionContext& context,
                                                 const torch::Tensor& target, const torch::Tensor& mask) {
    TORCH_CHECK(mask.dim() == 4 && mask.size(1) == 1 && mask.size(2) == context.height &&
                    mask.size(3) == context.width,
                "mask must be [B,1,", context.height, ",", context.width, "], got ", mask.sizes());
    auto agg = aggregation_->forward(context.target_feature, context.aligned, mask_to_feature(mask));
    CompletionOutput out;
    out.decoded = decode(agg.fused, context.height, context.width);
    out.completed = (1 - mask) * target + mask * out.decoded;
    out.feature = std::move(agg.fused);
    out.weights = std::move(agg.weights);
    return out;
}

CompletionOutput CompletionNetworkImpl::forward(const std::vector<torch::Tensor>& references,
                                                const torch::Tensor& target, const torch::Tensor& mask) {
    return complete(prepare(references, target), target, mask);
}

torch::Tensor CompletionNetworkImpl::decode(const torch::Tensor& feature, std::int64_t height,
                                            std::int64_t width) {
    auto logits = decoder_(feature);
    TORCH_CHECK(torch::isfinite(logits).all().item<bool>(), "non-finite decoder activations");
    return torch::sigmoid(logits).slice(2, 0, height).slice(3, 0, width);
}

MaskPredictionNetworkImpl::MaskPredictionNetworkImpl(const ModelConfig& config, FeatureAlignment alignment)
    : alignment_(std::move(alignment)) {
    config.validate();
    const auto c = config.channels;
    encoder_ = register_module("encoder", FrameEncoder(3, c, config.encoder_blocks));
    projection_ = register_module("projection", torch::nn::Conv2d(conv1x1(2 * c, c)));
    decoder_ = register_module("decoder", FeatureDecoder(2 * c, c, 1, config.decoder_blocks));
    // Start from a low prior on corruption (sigmoid(-2) ~ 0.12).
    torch::NoGradGuard no_grad;
    decoder_->head()->bias.fill_(-2.0);
}

torch::Tensor MaskPredictionNetworkImpl::logits(const torch::Tensor& query, const torch::Tensor& completed,
                                                const torch::Tensor& completed_feature) {
    TORCH_CHECK(query.sizes() == completed.sizes(), "query ", query.sizes(), " and completed ",
                completed.sizes(), " frames differ in shape");
    TORCH_CHECK(completed_feature.defined(), "mask prediction needs the completion feature");
    const auto g = encoder_(pad_frame(completed));
    const auto f = encoder_(pad_frame(query));
    TORCH_CHECK(completed_feature.sizes() == g.sizes(), "completion feature ", completed_feature.sizes(),
                " does not match encoder output ", g.sizes());
    const auto q = projection_(torch::cat({g, completed_feature}, 1));
    const auto aligned = alignment_->forward(q, f);
    return decoder_(torch::cat({aligned, f}, 1)).slice(2, 0, query.size(2)).slice(3, 0, query.size(3));
}

torch::Tensor MaskPredictionNetworkImpl::forward(const torch::Tensor& query, const torch::Tensor& completed,
                                                 const torch::Tensor& completed_feature) {
    return torch::sigmoid(logits(query, completed, completed_feature));
}

InpaintingModelImpl::InpaintingModelImpl(const ModelConfig& config) : config_(config) {
    config_.validate();
    alignment_ = register_module("alignment", FeatureAlignment(config_.channels, config_.dca_blocks));
    completion_ = register_module("completion", CompletionNetwork(config_, alignment_));
    mask_prediction_ = register_module("mask_prediction", MaskPredictionNetwork(config_, alignment_));
}

}  // namespace svi::model
