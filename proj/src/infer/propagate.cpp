#include "svi/infer/propagate.hpp"

#include "svi/model/binarize.hpp"
#include "svi/train/samples.hpp"

#include <map>
#include <set>

namespace svi::infer {

NetworkBackend::NetworkBackend(model::InpaintingModel model) : model_(std::move(model)) {
    model_->eval();
}

FrameCompletion NetworkBackend::complete(std::int64_t, const std::vector<torch::Tensor>& references,
                                         const torch::Tensor& target, const torch::Tensor& mask) {
    torch::NoGradGuard no_grad;
    const auto dtype = model_->parameters().front().scalar_type();
    std::vector<torch::Tensor> refs;
    refs.reserve(references.size());
    for (const auto& r : references) {
        refs.push_back(r.unsqueeze(0).to(dtype));
    }
    auto out = model_->completion()->forward(refs, target.unsqueeze(0).to(dtype), mask.unsqueeze(0).to(dtype));
    return {out.completed.squeeze(0).to(target.scalar_type()), out.feature.squeeze(0)};
}

torch::Tensor NetworkBackend::predict_mask(std::int64_t, const torch::Tensor& query, std::int64_t,
                                           const FrameCompletion& completed) {
    torch::NoGradGuard no_grad;
    const auto dtype = model_->parameters().front().scalar_type();
    auto soft = model_->mask_prediction()->forward(query.unsqueeze(0).to(dtype),
                                                   completed.frame.unsqueeze(0).to(dtype),
                                                   completed.feature.unsqueeze(0));
    return soft.squeeze(0).to(query.scalar_type());
}

std::int64_t NetworkBackend::reference_radius() const { return model_->config().reference_radius; }

OracleBackend::OracleBackend(torch::Tensor gt_frames, torch::Tensor gt_masks, std::int64_t radius)
    : gt_frames_(std::move(gt_frames)), gt_masks_(std::move(gt_masks)), radius_(radius) {}

FrameCompletion OracleBackend::complete(std::int64_t index, const std::vector<torch::Tensor>&,
                                        const torch::Tensor&, const torch::Tensor&) {
    return {gt_frames_[index].clone(), {}};
}

torch::Tensor OracleBackend::predict_mask(std::int64_t query_index, const torch::Tensor&, std::int64_t,
                                          const FrameCompletion&) {
    return gt_masks_[query_index].clone();
}

std::string to_string(Provenance p) { return p == Provenance::Annotated ? "annotated" : "predicted"; }

namespace {

void check_inputs(const torch::Tensor& frames, const AnnotationSet& annotations) {
    TORCH_CHECK(frames.dim() == 4 && frames.size(1) == 3 && frames.size(0) >= 1,
                "frames must be [T,3,H,W] with T >= 1, got ", frames.sizes());
    annotations.validate();
    TORCH_CHECK(annotations.length == frames.size(0), "annotation set is for ", annotations.length,
                " frames but the clip has ", frames.size(0));
    for (const auto& [index, mask] : annotations.masks) {
        TORCH_CHECK(mask.size(1) == frames.size(2) && mask.size(2) == frames.size(3), "annotation ", index,
                    " has shape ", mask.sizes(), " but frames are ", frames.sizes());
    }
}

/// Runs the steps of one segment, writing into `result`.
void run_segment(const std::vector<PlanStep>& steps, const torch::Tensor& frames,
                 const AnnotationSet& annotations, InpaintingBackend& backend,
                 const PropagateOptions& options, InpaintResult& result, std::int64_t& done,
                 std::int64_t total) {
    const auto length = frames.size(0);
    std::map<std::int64_t, FrameCompletion> completed;
    for (const auto& step : steps) {
        const auto t = step.frame;
        const auto x = frames[t];
        torch::Tensor soft;
        torch::Tensor mask;
        if (step.direction == Direction::Annotated) {
            mask = annotations.masks.at(t).gt(0.5).to(frames.scalar_type());
            soft = mask;
        } else {
            const auto& seed = completed.at(step.neighbour);
            soft = backend.predict_mask(t, x, step.neighbour, seed).to(frames.scalar_type());
            mask = model::binarize_mask(soft, options.threshold);
        }
        std::vector<torch::Tensor> refs;
        for (auto r : train::reference_indices(t, backend.reference_radius(), length)) {
            const auto it = completed.find(r);
            if (options.references == ReferenceSource::Completed && it != completed.end()) {
                refs.push_back(it->second.frame);
            } else {
                refs.push_back(frames[r]);
            }
        }
        auto out = backend.complete(t, refs, x, mask);
        result.completed[t].copy_(out.frame);
        result.masks[t].copy_(mask);
        result.soft_masks[t].copy_(soft);
        result.provenance[static_cast<std::size_t>(t)] =
            step.direction == Direction::Annotated ? Provenance::Annotated : Provenance::Predicted;
        completed.emplace(t, std::move(out));
        ++done;
        if (options.progress) {
            options.progress(done, total);
        }
    }
}

}  // namespace

InpaintResult propagate(const torch::Tensor& frames, const AnnotationSet& annotations,
                        InpaintingBackend& backend, const PropagateOptions& options) {
    check_inputs(frames, annotations);
    const auto plan = build_plan(annotations);
    InpaintResult result;
    result.completed = torch::zeros_like(frames);
    result.masks = torch::zeros({frames.size(0), 1, frames.size(2), frames.size(3)}, frames.options());
    result.soft_masks = torch::zeros_like(result.masks);
    result.provenance.assign(static_cast<std::size_t>(frames.size(0)), Provenance::Predicted);
    result.annotations = annotations;
    std::int64_t done = 0;
    for (auto a : annotations.indices()) {
        run_segment(plan.segment(a), frames, annotations, backend, options, result, done, frames.size(0));
    }
    return result;
}

InpaintResult refine(const InpaintResult& previous, const torch::Tensor& frames, std::int64_t index,
                     const torch::Tensor& mask, InpaintingBackend& backend, const PropagateOptions& options) {
    auto annotations = previous.annotations;
    annotations.masks[index] = mask;
    check_inputs(frames, annotations);
    TORCH_CHECK(previous.completed.sizes() == frames.sizes(), "previous result does not match the clip");

    InpaintResult result;
    result.completed = previous.completed.clone();
    result.masks = previous.masks.clone();
    result.soft_masks = previous.soft_masks.clone();
    result.provenance = previous.provenance;
    result.annotations = annotations;

    const auto segment = build_plan(annotations).segment(index);
    std::int64_t done = 0;
    run_segment(segment, frames, annotations, backend, options, result, done,
                static_cast<std::int64_t>(segment.size()));
    return result;
}

}  // namespace svi::infer
