#include "svi/infer/plan.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace svi::infer {

void AnnotationSet::validate() const {
    if (masks.empty()) {
        throw std::invalid_argument("at least one annotated frame is required");
    }
    for (const auto& [index, mask] : masks) {
        if (index < 0 || index >= length) {
            throw std::invalid_argument("annotation index " + std::to_string(index) + " outside [0, " +
                                        std::to_string(length) + ")");
        }
        if (!mask.defined() || mask.dim() != 3 || mask.size(0) != 1) {
            throw std::invalid_argument("annotation " + std::to_string(index) + " must be a [1,H,W] mask");
        }
    }
}

std::vector<std::int64_t> AnnotationSet::indices() const {
    std::vector<std::int64_t> out;
    for (const auto& [index, mask] : masks) {
        out.push_back(index);
    }
    return out;
}

std::vector<PlanStep> PropagationPlan::segment(std::int64_t annotation) const {
    std::vector<PlanStep> out;
    std::copy_if(steps.begin(), steps.end(), std::back_inserter(out),
                 [annotation](const PlanStep& s) { return s.owner == annotation; });
    return out;
}

std::int64_t owner_of(std::int64_t frame, const std::vector<std::int64_t>& annotated) {
    if (annotated.empty()) {
        throw std::invalid_argument("no annotations");
    }
    std::int64_t best = annotated.front();
    for (auto a : annotated) {
        const auto d = std::llabs(a - frame);
        const auto best_d = std::llabs(best - frame);
        if (d < best_d || (d == best_d && a < best)) {
            best = a;
        }
    }
    return best;
}

PropagationPlan build_plan(std::int64_t length, const std::vector<std::int64_t>& annotated) {
    if (annotated.empty()) {
        throw std::invalid_argument("cannot plan propagation without annotations");
    }
    auto sorted = annotated;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (auto a : sorted) {
        if (a < 0 || a >= length) {
            throw std::invalid_argument("annotation index " + std::to_string(a) + " outside the clip");
        }
    }
    PropagationPlan plan;
    for (auto a : sorted) {
        plan.steps.push_back({a, Direction::Annotated, a, a});
        for (auto t = a + 1; t < length && owner_of(t, sorted) == a; ++t) {
            plan.steps.push_back({t, Direction::Forward, a, t - 1});
        }
        for (auto t = a - 1; t >= 0 && owner_of(t, sorted) == a; --t) {
            plan.steps.push_back({t, Direction::Backward, a, t + 1});
        }
    }
    return plan;
}

PropagationPlan build_plan(const AnnotationSet& annotations) {
    annotations.validate();
    return build_plan(annotations.length, annotations.indices());
}

}  // namespace svi::infer
