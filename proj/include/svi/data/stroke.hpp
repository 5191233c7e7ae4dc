#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace svi::data {

inline constexpr double kMinCoverage = 0.005;
inline constexpr double kMaxCoverage = 0.40;

struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Free-form stroke parameters. Lengths and widths are pixels at
/// `reference_size`; `scaled_to` rescales them for other frame sizes.
struct StrokeSpec {
    IntRange num_strokes{1, 5};
    IntRange vertices_per_stroke{4, 12};
    RealRange brush_width{10.0, 40.0};
    RealRange segment_length{20.0, 64.0};
    double max_turn_angle = std::numbers::pi / 3.0;
    std::int64_t reference_size = 256;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;
    StrokeSpec scaled_to(std::int64_t height, std::int64_t width) const;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// A polyline drawn with a round brush of diameter `width`.
struct Stroke {
    std::vector<Point2> vertices;
    double width = 1.0;
};

using StrokeSet = std::vector<Stroke>;

/// Random walk polylines with bounded turn angle; vertices stay inside the frame.
StrokeSet sample_strokes(std::int64_t height, std::int64_t width, const StrokeSpec& spec,
                         std::mt19937_64& rng);

/// Pixel (x, y) is covered when its centre lies within width/2 of a segment.
/// Returns a binary [1,H,W] float tensor.
torch::Tensor rasterize_strokes(const StrokeSet& strokes, std::int64_t height, std::int64_t width);

double coverage(const torch::Tensor& mask);
bool coverage_ok(double fraction);

/// Samples strokes until the coverage bound holds; throws std::runtime_error
/// when `max_attempts` draws all fail (the spec ranges cannot satisfy it).
torch::Tensor generate_stroke_mask(std::int64_t height, std::int64_t width, const StrokeSpec& spec,
                                   std::mt19937_64& rng, int max_attempts = 200);

}  // namespace svi::data
