#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <vector>

namespace svi::infer {

/// Human-provided binary masks keyed by frame index.
struct AnnotationSet {
    std::int64_t length = 0;
    std::map<std::int64_t, torch::Tensor> masks;  ///< [1,H,W] each

    /// Throws std::invalid_argument if empty or any index is outside [0, length).
    void validate() const;
    std::vector<std::int64_t> indices() const;
};

enum class Direction { Annotated, Forward, Backward };

struct PlanStep {
    std::int64_t frame = 0;
    Direction direction = Direction::Annotated;
    std::int64_t owner = 0;      ///< annotation the frame's mask is propagated from
    std::int64_t neighbour = 0;  ///< already-completed frame that seeds the mask prediction

    bool operator==(const PlanStep&) const = default;
};

/// Steps grouped by owning annotation (ascending). Inside a group: the
/// annotated frame, the forward sweep, then the backward sweep.
struct PropagationPlan {
    std::vector<PlanStep> steps;

    /// Steps owned by `annotation`, in execution order.
    std::vector<PlanStep> segment(std::int64_t annotation) const;
};

/// Nearest annotation to `frame`; ties go to the earlier annotation.
std::int64_t owner_of(std::int64_t frame, const std::vector<std::int64_t>& annotated);

PropagationPlan build_plan(std::int64_t length, const std::vector<std::int64_t>& annotated);
PropagationPlan build_plan(const AnnotationSet& annotations);

}  // namespace svi::infer
