#include "svi/train/trainer.hpp"

#include <cmath>
#include <sstream>

namespace svi::train {

void OptimConfig::validate() const {
    std::vector<std::string> bad;
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        bad.emplace_back("optim.learning_rate");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0)) {
        bad.emplace_back("optim.beta1");
    }
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
        bad.emplace_back("optim.beta2");
    }
    if (batch_size < 1) {
        bad.emplace_back("optim.batch_size");
    }
    if (total_steps < 0) {
        bad.emplace_back("optim.total_steps");
    }
    if (crop_size < 4) {
        bad.emplace_back("optim.crop_size");
    }
    if (!bad.empty()) {
        std::string msg = "invalid optimizer configuration:";
        for (const auto& k : bad) {
            msg += " " + k;
        }
        throw std::invalid_argument(msg);
    }
}

nlohmann::json OptimConfig::to_json() const {
    return {{"learning_rate", learning_rate}, {"beta1", beta1},           {"beta2", beta2},
            {"batch_size", batch_size},       {"total_steps", total_steps}, {"seed", seed},
            {"crop_size", crop_size}};
}

OptimConfig OptimConfig::from_json(const nlohmann::json& j) {
    OptimConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.total_steps = j.value("total_steps", c.total_steps);
    c.seed = j.value("seed", c.seed);
    c.crop_size = j.value("crop_size", c.crop_size);
    return c;
}

namespace {

std::string describe(const LossReport& r) {
    std::ostringstream os;
    os << "non-finite loss (l_f=" << r.l_f << " l_s=" << r.l_s << " l_y=" << r.l_y << " l_m=" << r.l_m
       << " total=" << r.total << "); step aborted, parameters unchanged";
    return os.str();
}

}  // namespace

NonFiniteLoss::NonFiniteLoss(const LossReport& report)
    : std::runtime_error(describe(report)), report_(report) {}

StepForward forward_objective(model::InpaintingModelImpl& model, const Batch& batch,
                              const LossWeights& weights, const CycleConfig& cycle) {
    auto& phi = model.completion();
    auto& psi = model.mask_prediction();
    // Alignment of the references does not depend on the mask, so both
    // completion passes of the cycle share it.
    const auto context = phi->prepare(batch.references, batch.target);
    const Completer complete = [&](const torch::Tensor& mask) {
        auto out = phi->complete(context, batch.target, mask);
        return Completion{out.completed, out.feature};
    };
    const MaskPredictor predict = [&](const torch::Tensor& query, const Completion& done) {
        return psi->forward(query, done.completed, done.feature);
    };

    StepForward out;
    out.cycle = cycle_losses(batch.target, batch.mask, complete, predict, cycle);
    out.next_mask = predict(batch.next_frame, out.cycle.first);

    LossTerms terms;
    terms.l_f = loss_reconstruction(out.cycle.first.completed, batch.gt);
    terms.l_s = 0.5 * (loss_mask(out.cycle.predicted_mask, batch.mask) + loss_mask(out.next_mask, batch.next_mask));
    terms.l_y = out.cycle.l_y;
    terms.l_m = out.cycle.l_m;
    out.loss = total_loss(terms, weights);
    return out;
}

Trainer::Trainer(model::InpaintingModel model, LossWeights weights, OptimConfig optim, CycleConfig cycle)
    : model_(std::move(model)),
      weights_(weights),
      optim_(optim),
      cycle_(cycle),
      optimizer_(model_->parameters(),
                 torch::optim::AdamOptions(optim.learning_rate).betas({optim.beta1, optim.beta2})) {
    weights_.validate();
    optim_.validate();
}

LossReport Trainer::step(const Batch& batch) {
    model_->train();
    optimizer_.zero_grad();
    auto forward = forward_objective(*model_, batch, weights_, cycle_);
    const auto& report = forward.loss.report;
    if (!std::isfinite(report.total)) {
        optimizer_.zero_grad();
        throw NonFiniteLoss(report);
    }
    forward.loss.total.backward();
    optimizer_.step();
    ++steps_;
    return report;
}

std::map<std::string, torch::Tensor> Trainer::optimizer_state() {
    std::map<std::string, torch::Tensor> out;
    auto& state = optimizer_.state();
    for (const auto& item : model_->named_parameters()) {
        const auto it = state.find(item.value().unsafeGetTensorImpl());
        if (it == state.end()) {
            continue;
        }
        const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
        out.emplace("adam/" + item.key() + "/exp_avg", s.exp_avg().detach().clone());
        out.emplace("adam/" + item.key() + "/exp_avg_sq", s.exp_avg_sq().detach().clone());
        out.emplace("adam/" + item.key() + "/step", torch::tensor(std::vector<std::int64_t>{s.step()}));
    }
    return out;
}

void Trainer::load_optimizer_state(const std::map<std::string, torch::Tensor>& state) {
    auto& live = optimizer_.state();
    live.clear();
    for (const auto& item : model_->named_parameters()) {
        const auto base = "adam/" + item.key();
        const auto avg = state.find(base + "/exp_avg");
        if (avg == state.end()) {
            continue;
        }
        const auto sq = state.find(base + "/exp_avg_sq");
        const auto step = state.find(base + "/step");
        if (sq == state.end() || step == state.end()) {
            throw std::invalid_argument("incomplete optimizer state for " + item.key());
        }
        auto s = std::make_unique<torch::optim::AdamParamState>();
        s->step(step->second.item<std::int64_t>());
        s->exp_avg(avg->second.clone().to(item.value().options()));
        s->exp_avg_sq(sq->second.clone().to(item.value().options()));
        live[item.value().unsafeGetTensorImpl()] = std::move(s);
    }
}

}  // namespace svi::train
