#pragma once

#include "fixtures.hpp"

#include "svi/train/trainer.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace svi::test {

struct GradCheckEntry {
    std::string parameter;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
};

/// Miniature float64 model with non-trivial offsets and kernels, so the
/// sampler is exercised away from the identity.
inline model::InpaintingModel gradcheck_model(std::uint64_t seed) {
    torch::manual_seed(seed);
    model::InpaintingModel m(tiny_config(8, 1));
    m->to(torch::kFloat64);
    torch::NoGradGuard g;
    for (std::size_t i = 0; i < m->alignment()->size(); ++i) {
        auto block = m->alignment()->block(i);
        block->offset_out()->weight.normal_(0.0, 0.2);
        block->offset_out()->bias.uniform_(-0.8, 0.8);
        block->kernel().add_(torch::randn_like(block->kernel()) * 0.1);
    }
    return m;
}

inline train::Batch gradcheck_batch(std::uint64_t seed, std::int64_t size = 8) {
    torch::manual_seed(seed);
    const auto opts = torch::TensorOptions().dtype(torch::kFloat64);
    train::Batch b;
    b.target = torch::rand({1, 3, size, size}, opts);
    b.references = {torch::rand({1, 3, size, size}, opts), torch::rand({1, 3, size, size}, opts)};
    b.gt = torch::rand({1, 3, size, size}, opts);
    b.mask = torch::rand({1, 1, size, size}, opts).gt(0.6).to(torch::kFloat64);
    b.next_frame = torch::rand({1, 3, size, size}, opts);
    b.next_gt = torch::rand({1, 3, size, size}, opts);
    b.next_mask = torch::rand({1, 1, size, size}, opts).gt(0.6).to(torch::kFloat64);
    return b;
}

/// Central finite differences of the full training objective along one
/// random direction per parameter tensor. The cycle runs with soft masks so
/// the objective is smooth in every parameter. The step grows for groups
/// with tiny directional derivatives so float64 round-off in the objective
/// stays well below the tolerance.
inline std::vector<GradCheckEntry> gradient_check(std::uint64_t seed) {
    auto m = gradcheck_model(seed);
    const auto batch = gradcheck_batch(seed + 1);
    const train::LossWeights weights;
    const train::CycleConfig cycle{0.5, train::BinarizeMode::Soft};
    const auto objective = [&] { return train::forward_objective(*m, batch, weights, cycle).loss.total; };

    m->zero_grad();
    objective().backward();

    std::vector<GradCheckEntry> out;
    torch::manual_seed(seed + 2);
    for (auto& item : m->named_parameters()) {
        auto p = item.value();
        auto v = torch::randn_like(p);
        v /= v.norm();
        GradCheckEntry e;
        e.parameter = item.key();
        e.analytic = (p.grad() * v).sum().item<double>();
        const double eps = std::clamp(1e-11 / std::max(std::abs(e.analytic), 1e-300), 1e-6, 1e-2);
        torch::NoGradGuard g;
        p.add_(v * eps);
        const double plus = objective().item<double>();
        p.sub_(v * (2.0 * eps));
        const double minus = objective().item<double>();
        p.add_(v * eps);
        e.numeric = (plus - minus) / (2.0 * eps);
        e.rel_err = std::abs(e.analytic - e.numeric) / std::max({std::abs(e.analytic), std::abs(e.numeric), 1e-10});
        out.push_back(e);
    }
    return out;
}

}  // namespace svi::test
