#pragma once

#include "svi/model/checkpoint.hpp"
#include "svi/model/networks.hpp"
#include "svi/train/cycle.hpp"
#include "svi/train/losses.hpp"
#include "svi/train/samples.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <map>
#include <stdexcept>

namespace svi::train {

struct OptimConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::int64_t batch_size = 4;
    std::int64_t total_steps = 2000;
    std::uint64_t seed = 0;
    std::int64_t crop_size = 64;

    void validate() const;
    nlohmann::json to_json() const;
    static OptimConfig from_json(const nlohmann::json& j);
};

/// Raised when a step produces a non-finite loss. Parameters are untouched.
class NonFiniteLoss : public std::runtime_error {
public:
    explicit NonFiniteLoss(const LossReport& report);
    const LossReport& report() const noexcept { return report_; }

private:
    LossReport report_;
};

/// All forward passes of one training step and the weighted total.
struct StepForward {
    WeightedLoss loss;
    CycleOutput cycle;
    torch::Tensor next_mask;  ///< Psi(x_{t+1}, y^_t)
};

/// Runs the joint objective for a batch. Teacher forcing: the completion
/// network always receives the ground-truth m_t; predicted masks enter only
/// through the cycle terms and the mask supervision. The mask loss averages
/// same-frame and next-frame supervision.
StepForward forward_objective(model::InpaintingModelImpl& model, const Batch& batch,
                              const LossWeights& weights, const CycleConfig& cycle = {});

/// Adam over the joint parameters (shared alignment counted once).
class Trainer {
public:
    Trainer(model::InpaintingModel model, LossWeights weights, OptimConfig optim, CycleConfig cycle = {});

    /// One Adam update on the weighted total. Throws NonFiniteLoss before
    /// touching parameters when the loss is not finite.
    LossReport step(const Batch& batch);

    model::InpaintingModel& model() { return model_; }
    torch::optim::Adam& optimizer() { return optimizer_; }
    std::int64_t steps_taken() const { return steps_; }
    void set_steps_taken(std::int64_t steps) { steps_ = steps; }
    const LossWeights& weights() const { return weights_; }
    const OptimConfig& optim() const { return optim_; }

    /// Optimizer moments keyed "adam/<param>/{exp_avg,exp_avg_sq,step}".
    std::map<std::string, torch::Tensor> optimizer_state();
    void load_optimizer_state(const std::map<std::string, torch::Tensor>& state);

private:
    model::InpaintingModel model_;
    LossWeights weights_;
    OptimConfig optim_;
    CycleConfig cycle_;
    torch::optim::Adam optimizer_;
    std::int64_t steps_ = 0;
};

}  // namespace svi::train
