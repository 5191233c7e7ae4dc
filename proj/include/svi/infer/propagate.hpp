#pragma once

#include "svi/infer/plan.hpp"
#include "svi/model/networks.hpp"

#include <torch/torch.h>

#include <functional>
#include <string>
#include <vector>

namespace svi::infer {

/// Output of one completion call on a single frame.
struct FrameCompletion {
    torch::Tensor frame;    ///< [3,H,W]
    torch::Tensor feature;  ///< [C,H/4,W/4]; may be undefined for oracles
};

/// The two mappings the pipeline alternates. Implementations receive frame
/// indices so test doubles can look up ground truth.
class InpaintingBackend {
public:
    virtual ~InpaintingBackend() = default;

    virtual FrameCompletion complete(std::int64_t index, const std::vector<torch::Tensor>& references,
                                     const torch::Tensor& target, const torch::Tensor& mask) = 0;
    /// Soft [1,H,W] corruption mask of `query`.
    virtual torch::Tensor predict_mask(std::int64_t query_index, const torch::Tensor& query,
                                       std::int64_t completed_index, const FrameCompletion& completed) = 0;
    virtual std::int64_t reference_radius() const = 0;
};

/// Runs the trained networks without gradients, one frame at a time.
class NetworkBackend final : public InpaintingBackend {
public:
    explicit NetworkBackend(model::InpaintingModel model);

    FrameCompletion complete(std::int64_t index, const std::vector<torch::Tensor>& references,
                             const torch::Tensor& target, const torch::Tensor& mask) override;
    torch::Tensor predict_mask(std::int64_t query_index, const torch::Tensor& query,
                               std::int64_t completed_index, const FrameCompletion& completed) override;
    std::int64_t reference_radius() const override;

private:
    model::InpaintingModel model_;
};

/// Returns ground-truth frames and masks; used to check the pipeline itself.
class OracleBackend final : public InpaintingBackend {
public:
    OracleBackend(torch::Tensor gt_frames, torch::Tensor gt_masks, std::int64_t radius = 1);

    FrameCompletion complete(std::int64_t index, const std::vector<torch::Tensor>& references,
                             const torch::Tensor& target, const torch::Tensor& mask) override;
    torch::Tensor predict_mask(std::int64_t query_index, const torch::Tensor& query,
                               std::int64_t completed_index, const FrameCompletion& completed) override;
    std::int64_t reference_radius() const override { return radius_; }

private:
    torch::Tensor gt_frames_;
    torch::Tensor gt_masks_;
    std::int64_t radius_;
};

enum class ReferenceSource {
    Raw,        ///< always the corrupted input frames (matches training)
    Completed,  ///< completed frames of the same segment when available, else raw
};

enum class Provenance { Annotated, Predicted };
std::string to_string(Provenance p);

struct PropagateOptions {
    double threshold = 0.5;
    ReferenceSource references = ReferenceSource::Raw;
    /// Called after each produced frame with (done, total).
    std::function<void(std::int64_t, std::int64_t)> progress;
};

struct InpaintResult {
    torch::Tensor completed;   ///< [T,3,H,W]
    torch::Tensor masks;       ///< binary, [T,1,H,W]
    torch::Tensor soft_masks;  ///< [T,1,H,W]
    std::vector<Provenance> provenance;
    AnnotationSet annotations;
};

/// Completes every frame of `frames` ([T,3,H,W]) from sparse annotations,
/// sweeping out of each annotation towards the frames it owns.
InpaintResult propagate(const torch::Tensor& frames, const AnnotationSet& annotations,
                        InpaintingBackend& backend, const PropagateOptions& options = {});

/// Adds (or replaces) one annotation and recomputes only the segment it now owns.
InpaintResult refine(const InpaintResult& previous, const torch::Tensor& frames, std::int64_t index,
                     const torch::Tensor& mask, InpaintingBackend& backend,
                     const PropagateOptions& options = {});

}  // namespace svi::infer
