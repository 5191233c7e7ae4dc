#include "svi/data/stroke.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svi::data {
namespace {

std::int64_t draw_int(std::mt19937_64& rng, IntRange r) {
    return std::uniform_int_distribution<std::int64_t>(r.lo, r.hi)(rng);
}

double draw_real(std::mt19937_64& rng, RealRange r) {
    if (r.lo == r.hi) {
        return r.lo;
    }
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

double segment_distance_sq(double px, double py, Point2 a, Point2 b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len_sq = dx * dx + dy * dy;
    double t = 0.0;
    if (len_sq > 0.0) {
        t = std::clamp(((px - a.x) * dx + (py - a.y) * dy) / len_sq, 0.0, 1.0);
    }
    const double cx = a.x + t * dx - px;
    const double cy = a.y + t * dy - py;
    return cx * cx + cy * cy;
}

}  // namespace

void StrokeSpec::validate() const {
    if (num_strokes.lo < 1 || num_strokes.hi < num_strokes.lo) {
        throw std::invalid_argument("stroke.num_strokes: empty or non-positive range");
    }
    if (vertices_per_stroke.lo < 1 || vertices_per_stroke.hi < vertices_per_stroke.lo) {
        throw std::invalid_argument("stroke.vertices_per_stroke: empty or non-positive range");
    }
    if (!(brush_width.lo > 0.0) || brush_width.hi < brush_width.lo) {
        throw std::invalid_argument("stroke.brush_width: must be a nonempty range with width > 0");
    }
    if (segment_length.lo < 0.0 || segment_length.hi < segment_length.lo) {
        throw std::invalid_argument("stroke.segment_length: empty or negative range");
    }
    if (!(max_turn_angle >= 0.0)) {
        throw std::invalid_argument("stroke.max_turn_angle: must be >= 0");
    }
    if (reference_size < 1) {
        throw std::invalid_argument("stroke.reference_size: must be positive");
    }
}

StrokeSpec StrokeSpec::scaled_to(std::int64_t height, std::int64_t width) const {
    StrokeSpec out = *this;
    const double scale =
        static_cast<double>(std::min(height, width)) / static_cast<double>(reference_size);
    out.brush_width = {brush_width.lo * scale, brush_width.hi * scale};
    out.segment_length = {segment_length.lo * scale, segment_length.hi * scale};
    out.reference_size = std::min(height, width);
    return out;
}

StrokeSet sample_strokes(std::int64_t height, std::int64_t width, const StrokeSpec& spec,
                         std::mt19937_64& rng) {
    spec.validate();
    const double max_x = static_cast<double>(width - 1);
    const double max_y = static_cast<double>(height - 1);
    StrokeSet strokes;
    const auto count = draw_int(rng, spec.num_strokes);
    for (std::int64_t s = 0; s < count; ++s) {
        Stroke stroke;
        stroke.width = draw_real(rng, spec.brush_width);
        const auto vertices = draw_int(rng, spec.vertices_per_stroke);
        Point2 p{draw_real(rng, {0.0, max_x}), draw_real(rng, {0.0, max_y})};
        double angle = draw_real(rng, {0.0, 2.0 * std::numbers::pi});
        stroke.vertices.push_back(p);
        for (std::int64_t v = 1; v < vertices; ++v) {
            if (v > 1) {
                angle += draw_real(rng, {-spec.max_turn_angle, spec.max_turn_angle});
            }
            const double length = draw_real(rng, spec.segment_length);
            p.x = std::clamp(p.x + length * std::cos(angle), 0.0, max_x);
            p.y = std::clamp(p.y + length * std::sin(angle), 0.0, max_y);
            stroke.vertices.push_back(p);
        }
        strokes.push_back(std::move(stroke));
    }
    return strokes;
}

torch::Tensor rasterize_strokes(const StrokeSet& strokes, std::int64_t height, std::int64_t width) {
    auto mask = torch::zeros({1, height, width}, torch::kFloat32);
    auto acc = mask.accessor<float, 3>();
    for (const auto& stroke : strokes) {
        const double radius = stroke.width / 2.0;
        const double radius_sq = radius * radius;
        // A single vertex is a dot.
        const std::size_t segments = std::max<std::size_t>(stroke.vertices.size(), 2) - 1;
        for (std::size_t i = 0; i < segments; ++i) {
            const Point2 a = stroke.vertices[i];
            const Point2 b = stroke.vertices[std::min(i + 1, stroke.vertices.size() - 1)];
            const auto x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::min(a.x, b.x) - radius)));
            const auto x1 = std::min<std::int64_t>(width - 1, static_cast<std::int64_t>(std::ceil(std::max(a.x, b.x) + radius)));
            const auto y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::min(a.y, b.y) - radius)));
            const auto y1 = std::min<std::int64_t>(height - 1, static_cast<std::int64_t>(std::ceil(std::max(a.y, b.y) + radius)));
            for (std::int64_t y = y0; y <= y1; ++y) {
                for (std::int64_t x = x0; x <= x1; ++x) {
                    if (segment_distance_sq(static_cast<double>(x), static_cast<double>(y), a, b) <= radius_sq) {
                        acc[0][y][x] = 1.0F;
                    }
                }
            }
        }
    }
    return mask;
}

double coverage(const torch::Tensor& mask) {
    return mask.gt(0.5).to(torch::kFloat64).mean().item<double>();
}

bool coverage_ok(double fraction) { return fraction >= kMinCoverage && fraction <= kMaxCoverage; }

torch::Tensor generate_stroke_mask(std::int64_t height, std::int64_t width, const StrokeSpec& spec,
                                   std::mt19937_64& rng, int max_attempts) {
    if (height < 32 || width < 32) {
        throw std::invalid_argument("stroke masks need frames of at least 32x32");
    }
    spec.validate();
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        auto mask = rasterize_strokes(sample_strokes(height, width, spec, rng), height, width);
        if (coverage_ok(coverage(mask))) {
            return mask;
        }
    }
    throw std::runtime_error("stroke spec cannot satisfy the coverage bound [0.5%, 40%] within " +
                             std::to_string(max_attempts) + " attempts");
}

}  // namespace svi::data
