#pragma once

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace svi::train {

inline constexpr double kBceEpsilon = 1e-7;

struct LossWeights {
    double lambda_f = 2.5;
    double lambda_s = 0.25;
    double lambda_c = 1.0;
    /// Trade-off inside the cycle term; not fixed by the method, 1.0 by default.
    double lambda_y = 1.0;

    /// Throws std::invalid_argument when any weight is negative or non-finite.
    void validate() const;
    nlohmann::json to_json() const;
    static LossWeights from_json(const nlohmann::json& j);
};

struct LossReport {
    double l_f = 0.0;
    double l_s = 0.0;
    double l_y = 0.0;
    double l_m = 0.0;
    double l_c = 0.0;
    double total = 0.0;

    nlohmann::json to_json() const;
    bool operator==(const LossReport&) const = default;
};

/// Mean absolute error over all pixels and channels.
torch::Tensor loss_reconstruction(const torch::Tensor& pred, const torch::Tensor& target);

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
torch::Tensor loss_mask(const torch::Tensor& pred, const torch::Tensor& gt);

/// Differentiable components; each is a scalar tensor.
struct LossTerms {
    torch::Tensor l_f;
    torch::Tensor l_s;
    torch::Tensor l_y;
    torch::Tensor l_m;
};

struct WeightedLoss {
    torch::Tensor total;
    LossReport report;
};

WeightedLoss total_loss(const LossTerms& terms, const LossWeights& weights);

/// Scalar form: l_c = l_m + lambda_y * l_y and
/// total = lambda_f * l_f + lambda_s * l_s + lambda_c * l_c.
LossReport total_loss(double l_f, double l_s, double l_m, double l_y, const LossWeights& weights);

}  // namespace svi::train
