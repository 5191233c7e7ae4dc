#pragma once

#include <torch/torch.h>

#include <functional>

namespace svi::train {

struct Completion {
    torch::Tensor completed;  ///< [B,3,H,W]
    torch::Tensor feature;    ///< aggregated feature, may be undefined for oracles
};

/// Completion for one fixed target and reference set, as a function of the mask.
using Completer = std::function<Completion(const torch::Tensor& mask)>;
/// Soft mask of `query` given the completion of a neighbouring or the same frame.
using MaskPredictor = std::function<torch::Tensor(const torch::Tensor& query, const Completion& completed)>;

enum class BinarizeMode {
    StraightThrough,  ///< hard mask forward, identity gradient
    Soft,             ///< pass the soft mask through (smooth; used for gradient checks)
};

struct CycleConfig {
    double threshold = 0.5;
    BinarizeMode mode = BinarizeMode::StraightThrough;
};

struct CycleOutput {
    torch::Tensor l_y;
    torch::Tensor l_m;
    Completion first;             ///< y^_t = completer(m_t)
    torch::Tensor predicted_mask; ///< m*_t = predictor(x_t, y^_t), soft
    Completion second;            ///< y^*_t = completer(binarize(m*_t))
};

/// Both cycle compositions for one target:
///   y^*_t = Phi(X_r, x_t, Psi(x_t, y^_t)),   m*_t = Psi(x_t, Phi(X_r, x_t, m_t)),
/// with L_y = mean|y^_t - y^*_t| and L_m = mean|m_t - m*_t|.
CycleOutput cycle_losses(const torch::Tensor& target, const torch::Tensor& mask, const Completer& complete,
                         const MaskPredictor& predict, const CycleConfig& config = {});

}  // namespace svi::train
