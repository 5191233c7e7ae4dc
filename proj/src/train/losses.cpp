#include "svi/train/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace svi::train {

void LossWeights::validate() const {
    const std::pair<const char*, double> all[] = {
        {"loss.lambda_f", lambda_f}, {"loss.lambda_s", lambda_s},
        {"loss.lambda_c", lambda_c}, {"loss.lambda_y", lambda_y}};
    for (const auto& [name, value] : all) {
        if (!std::isfinite(value) || value < 0.0) {
            throw std::invalid_argument(std::string(name) + ": loss weights must be finite and >= 0");
        }
    }
}

nlohmann::json LossWeights::to_json() const {
    return {{"lambda_f", lambda_f}, {"lambda_s", lambda_s}, {"lambda_c", lambda_c}, {"lambda_y", lambda_y}};
}

LossWeights LossWeights::from_json(const nlohmann::json& j) {
    LossWeights w;
    w.lambda_f = j.value("lambda_f", w.lambda_f);
    w.lambda_s = j.value("lambda_s", w.lambda_s);
    w.lambda_c = j.value("lambda_c", w.lambda_c);
    w.lambda_y = j.value("lambda_y", w.lambda_y);
    return w;
}

nlohmann::json LossReport::to_json() const {
    return {{"l_f", l_f}, {"l_s", l_s}, {"l_y", l_y}, {"l_m", l_m}, {"l_c", l_c}, {"total", total}};
}

torch::Tensor loss_reconstruction(const torch::Tensor& pred, const torch::Tensor& target) {
    TORCH_CHECK(pred.sizes() == target.sizes(), "reconstruction loss shape mismatch: ", pred.sizes(),
                " vs ", target.sizes());
    return (pred - target).abs().mean();
}

torch::Tensor loss_mask(const torch::Tensor& pred, const torch::Tensor& gt) {
    TORCH_CHECK(pred.sizes() == gt.sizes(), "mask loss shape mismatch: ", pred.sizes(), " vs ", gt.sizes());
    const auto p = pred.clamp(kBceEpsilon, 1.0 - kBceEpsilon);
    return -(gt * torch::log(p) + (1 - gt) * torch::log(1 - p)).mean();
}

WeightedLoss total_loss(const LossTerms& terms, const LossWeights& weights) {
    weights.validate();
    const auto l_c = terms.l_m + weights.lambda_y * terms.l_y;
    WeightedLoss out;
    out.total = weights.lambda_f * terms.l_f + weights.lambda_s * terms.l_s + weights.lambda_c * l_c;
    out.report = total_loss(terms.l_f.item<double>(), terms.l_s.item<double>(), terms.l_m.item<double>(),
                            terms.l_y.item<double>(), weights);
    return out;
}

LossReport total_loss(double l_f, double l_s, double l_m, double l_y, const LossWeights& weights) {
    weights.validate();
    LossReport r;
    r.l_f = l_f;
    r.l_s = l_s;
    r.l_m = l_m;
    r.l_y = l_y;
    r.l_c = l_m + weights.lambda_y * l_y;
    r.total = weights.lambda_f * l_f + weights.lambda_s * l_s + weights.lambda_c * r.l_c;
    return r;
}

}  // namespace svi::train
