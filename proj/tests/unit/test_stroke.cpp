#include "svi/data/stroke.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace svi::data;

namespace {

/// Stamps round brushes densely along every segment; each stamped pixel lies
/// within width/2 of the polyline, so the result is a subset of the exact
/// rasterization and converges to it as the stamp spacing shrinks.
torch::Tensor stamp_disks(const StrokeSet& strokes, std::int64_t h, std::int64_t w) {
    auto out = torch::zeros({1, h, w});
    auto acc = out.accessor<float, 3>();
    for (const auto& s : strokes) {
        const double r = s.width / 2.0;
        for (std::size_t i = 0; i + 1 < s.vertices.size(); ++i) {
            const auto a = s.vertices[i];
            const auto b = s.vertices[i + 1];
            const int steps = 4000;
            for (int k = 0; k <= steps; ++k) {
                const double cx = a.x + (b.x - a.x) * k / steps;
                const double cy = a.y + (b.y - a.y) * k / steps;
                for (auto y = std::max<std::int64_t>(0, std::floor(cy - r)); y <= std::min<std::int64_t>(h - 1, std::ceil(cy + r)); ++y) {
                    for (auto x = std::max<std::int64_t>(0, std::floor(cx - r)); x <= std::min<std::int64_t>(w - 1, std::ceil(cx + r)); ++x) {
                        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
                            acc[0][y][x] = 1.0F;
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

TEST(Stroke, SingleThickPolylineMatchesDiskStamping) {
    StrokeSpec spec;
    spec.num_strokes = {1, 1};
    spec.vertices_per_stroke = {2, 2};
    spec.brush_width = {9.0, 9.0};
    spec.segment_length = {20.0, 40.0};
    spec.reference_size = 64;
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto strokes = sample_strokes(64, 64, spec, rng);
        ASSERT_EQ(strokes.size(), 1U);
        ASSERT_EQ(strokes[0].vertices.size(), 2U);
        const auto exact = rasterize_strokes(strokes, 64, 64);
        const auto stamped = stamp_disks(strokes, 64, 64);
        // stamped pixels are all covered by the exact rule
        EXPECT_TRUE(torch::equal(stamped * exact, stamped));
        const auto missing = (exact - stamped).sum().item<double>();
        EXPECT_LE(missing, 2.0);
        const auto frac = coverage(exact);
        EXPECT_GE(frac, kMinCoverage);
        EXPECT_LE(frac, kMaxCoverage);
    }
}

TEST(Stroke, GeneratedMaskIsBinaryWithinCoverageBound) {
    const auto spec = StrokeSpec{}.scaled_to(64, 64);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto m = generate_stroke_mask(64, 64, spec, rng);
        EXPECT_TRUE(m.eq(0).logical_or(m.eq(1)).all().item<bool>());
        EXPECT_TRUE(coverage_ok(coverage(m)));
    }
}

TEST(Stroke, ZeroBrushWidthIsAConfigurationError) {
    StrokeSpec spec;
    spec.brush_width = {0.0, 10.0};
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    std::mt19937_64 rng(0);
    EXPECT_THROW(generate_stroke_mask(64, 64, spec, rng), std::invalid_argument);
}

TEST(Stroke, EmptyRangesRejected) {
    StrokeSpec spec;
    spec.num_strokes = {3, 2};
    EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Stroke, SameSeedGivesIdenticalMasks) {
    const auto spec = StrokeSpec{}.scaled_to(64, 64);
    std::mt19937_64 a(42);
    std::mt19937_64 b(42);
    EXPECT_TRUE(torch::equal(generate_stroke_mask(64, 64, spec, a), generate_stroke_mask(64, 64, spec, b)));
}

TEST(Stroke, UnsatisfiableSpecFailsWithinRetryBudget) {
    StrokeSpec spec;
    spec.num_strokes = {5, 5};
    spec.vertices_per_stroke = {12, 12};
    spec.brush_width = {60.0, 60.0};
    spec.reference_size = 64;
    std::mt19937_64 rng(1);
    EXPECT_THROW(generate_stroke_mask(64, 64, spec, rng, 10), std::runtime_error);
}

TEST(Stroke, FramesSmallerThan32Rejected) {
    std::mt19937_64 rng(1);
    EXPECT_THROW(generate_stroke_mask(16, 64, StrokeSpec{}, rng), std::invalid_argument);
}

TEST(Stroke, TurnAngleBounded) {
    StrokeSpec spec = StrokeSpec{}.scaled_to(128, 128);
    spec.max_turn_angle = 0.3;
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        for (const auto& s : sample_strokes(128, 128, spec, rng)) {
            for (std::size_t k = 2; k < s.vertices.size(); ++k) {
                const auto& p0 = s.vertices[k - 2];
                const auto& p1 = s.vertices[k - 1];
                const auto& p2 = s.vertices[k];
                const double a1 = std::atan2(p1.y - p0.y, p1.x - p0.x);
                const double a2 = std::atan2(p2.y - p1.y, p2.x - p1.x);
                const double l1 = std::hypot(p1.x - p0.x, p1.y - p0.y);
                const double l2 = std::hypot(p2.x - p1.x, p2.y - p1.y);
                if (l1 < 1e-6 || l2 < 1e-6) {
                    continue;  // clamped against a border
                }
                const double turn = std::abs(std::remainder(a2 - a1, 2.0 * M_PI));
                // clamping at the border bends a segment further; only check free segments
                const auto inside = [](const Point2& p) { return p.x > 0.0 && p.x < 127.0 && p.y > 0.0 && p.y < 127.0; };
                if (inside(p1) && inside(p2)) {
                    EXPECT_LE(turn, 0.3 + 1e-9);
                }
            }
        }
    }
}
