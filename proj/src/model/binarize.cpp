#include "svi/model/binarize.hpp"

namespace svi::model {

torch::Tensor binarize_mask(const torch::Tensor& soft, double threshold) {
    TORCH_CHECK(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0,1), got ", threshold);
    return soft.ge(threshold).to(soft.scalar_type());
}

torch::Tensor straight_through_binarize(const torch::Tensor& soft, double threshold) {
    return soft + (binarize_mask(soft.detach(), threshold) - soft.detach());
}

}  // namespace svi::model
