#include "svi/model/aggregation.hpp"

#include "svi/model/layers.hpp"

namespace svi::model {

TemporalAggregationImpl::TemporalAggregationImpl(std::int64_t channels, std::int64_t references)
    : references_(references) {
    TORCH_CHECK(references >= 1, "aggregation needs at least one reference");
    query_ = register_module("query", torch::nn::Conv2d(conv1x1(channels, channels)));
    key_ = register_module("key", torch::nn::Conv2d(conv1x1(channels, channels)));
    value_ = register_module("value", torch::nn::Conv2d(conv1x1(channels, channels)));
    fusion_ = register_module("fusion",
                              torch::nn::Conv2d(conv1x1((references + 1) * channels + 1, channels)));
}

torch::Tensor TemporalAggregationImpl::attention(const torch::Tensor& target,
                                                 const std::vector<torch::Tensor>& aligned) {
    TORCH_CHECK(!aligned.empty(), "aggregation needs at least one aligned reference");
    const auto q = query_(target);
    std::vector<torch::Tensor> logits;
    logits.reserve(aligned.size());
    for (const auto& ref : aligned) {
        TORCH_CHECK(ref.sizes() == target.sizes(), "aligned reference shape ", ref.sizes(),
                    " differs from target ", target.sizes());
        logits.push_back((q * key_(ref)).sum(1));
    }
    return torch::softmax(torch::stack(logits, 1), 1);
}

AggregationOutput TemporalAggregationImpl::forward(const torch::Tensor& target,
                                                   const std::vector<torch::Tensor>& aligned,
                                                   const torch::Tensor& mask_feature) {
    TORCH_CHECK(static_cast<std::int64_t>(aligned.size()) == references_, "expected ", references_,
                " aligned references, got ", aligned.size());
    auto weights = attention(target, aligned);
    std::vector<torch::Tensor> parts;
    parts.reserve(aligned.size() + 2);
    for (std::size_t r = 0; r < aligned.size(); ++r) {
        parts.push_back(value_(aligned[r]) * weights.narrow(1, static_cast<std::int64_t>(r), 1));
    }
    parts.push_back(target);
    parts.push_back(mask_feature);
    return {fusion_(torch::cat(parts, 1)), std::move(weights)};
}

}  // namespace svi::model
