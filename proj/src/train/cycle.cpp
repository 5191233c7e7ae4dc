#include "svi/train/cycle.hpp"

#include "svi/model/binarize.hpp"

namespace svi::train {

CycleOutput cycle_losses(const torch::Tensor& target, const torch::Tensor& mask, const Completer& complete,
                         const MaskPredictor& predict, const CycleConfig& config) {
    CycleOutput out;
    out.first = complete(mask);
    out.predicted_mask = predict(target, out.first);
    TORCH_CHECK(out.predicted_mask.sizes() == mask.sizes(), "predicted mask ", out.predicted_mask.sizes(),
                " does not match ", mask.sizes());
    const auto fed_back = config.mode == BinarizeMode::StraightThrough
                              ? model::straight_through_binarize(out.predicted_mask, config.threshold)
                              : out.predicted_mask;
    out.second = complete(fed_back);
    out.l_y = (out.first.completed - out.second.completed).abs().mean();
    out.l_m = (mask - out.predicted_mask).abs().mean();
    return out;
}

}  // namespace svi::train
