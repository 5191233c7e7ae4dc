#include "svi/data/procedural.hpp"
#include "svi/data/synth.hpp"
#include "svi/image.hpp"

#include <gtest/gtest.h>

using namespace svi::data;

namespace {

struct SynthSetup {
    SourceClip src = make_procedural_clip("clip-a", 4, 64, 64, 5);
    NoiseBank bank = make_procedural_noise_bank(3, 64, 64, 6);
    StrokeSpec stroke = StrokeSpec{}.scaled_to(64, 64);
    SmoothSpec smooth;
};

}  // namespace

TEST(Synth, ZeroJitterKeepsMasksFixed) {
    SynthSetup s;
    const auto clip = synthesize_clip(s.src, s.bank, s.stroke, s.smooth, MotionJitter::none(), 17);
    for (std::int64_t t = 1; t < clip.length(); ++t) {
        EXPECT_TRUE(torch::equal(clip.masks[t], clip.masks[0]));
    }
}

TEST(Synth, SameSeedsGiveIdenticalClips) {
    SynthSetup s;
    const auto a = synthesize_clip(s.src, s.bank, s.stroke, s.smooth, MotionJitter{}, 99);
    const auto b = synthesize_clip(s.src, s.bank, s.stroke, s.smooth, MotionJitter{}, 99);
    EXPECT_TRUE(torch::equal(a.frames, b.frames));
    EXPECT_TRUE(torch::equal(a.masks, b.masks));
    EXPECT_TRUE(torch::equal(a.alphas, b.alphas));
    EXPECT_EQ(a.provenance, b.provenance);
    const auto c = synthesize_clip(s.src, s.bank, s.stroke, s.smooth, MotionJitter{}, 100);
    EXPECT_FALSE(torch::equal(a.masks, c.masks));
}

TEST(Synth, ConstantTranslationShiftsTheStrokes) {
    SynthSetup s;
    s.src = make_procedural_clip("clip-b", 3, 64, 64, 8);
    MotionJitter jitter = MotionJitter::none();
    jitter.drift = {1.0, 0.0};
    const std::uint64_t seed = 23;
    const auto clip = synthesize_clip(s.src, s.bank, s.stroke, s.smooth, jitter, seed);

    std::mt19937_64 rng(clip.provenance.stroke_seed);
    const auto strokes = sample_strokes(64, 64, s.stroke, rng);
    ASSERT_TRUE(torch::equal(clip.masks[0], rasterize_strokes(strokes, 64, 64)))
        << "fixture relies on the first stroke draw being accepted";
    const auto shifted = transform_strokes(strokes, Pose{2.0, 0.0, 0.0}, stroke_centroid(strokes));
    EXPECT_TRUE(torch::equal(clip.masks[2], rasterize_strokes(shifted, 64, 64)));
    // away from the borders this is the frame-0 raster moved two columns right
    using torch::indexing::Slice;
    const auto moved = clip.masks[0].index({Slice(), Slice(), Slice(2, 60)});
    EXPECT_TRUE(torch::equal(clip.masks[2].index({Slice(), Slice(), Slice(4, 62)}), moved));
}

TEST(Synth, CompositeIdentitiesAndCoverage) {
    SynthSetup s;
    const auto clip = synthesize_clip(s.src, s.bank, s.stroke, s.smooth, MotionJitter{}, 31);
    const auto noise = fit_patch(s.bank.patches[0], 64, 64);
    for (std::int64_t t = 0; t < clip.length(); ++t) {
        const auto a = clip.alphas[t];
        const auto zero = a.eq(0).expand({3, 64, 64});
        EXPECT_TRUE(torch::equal(clip.frames[t].masked_select(zero), clip.gt_frames[t].masked_select(zero)));
        EXPECT_TRUE(coverage_ok(coverage(clip.masks[t])));
        // alpha is 1 exactly on the binary support
        EXPECT_TRUE(a.masked_select(clip.masks[t].gt(0.5)).eq(1).all().item<bool>());
    }
    EXPECT_NE(clip.provenance.noise_id, clip.provenance.clip_id);
    (void)noise;
}

TEST(Synth, NoisePatchFromTheSameClipIsNeverUsed) {
    SynthSetup s;
    NoiseBank bank;
    bank.patches = {s.bank.patches[0], s.bank.patches[1]};
    bank.source_ids = {"clip-a", "other"};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto clip = synthesize_clip(s.src, bank, s.stroke, s.smooth, MotionJitter{}, seed);
        EXPECT_EQ(clip.provenance.noise_id, "other");
    }
    bank.source_ids = {"clip-a", "clip-a"};
    EXPECT_THROW(synthesize_clip(s.src, bank, s.stroke, s.smooth, MotionJitter{}, 0), std::invalid_argument);
}

TEST(Synth, JitterLimitsValidated) {
    MotionJitter j;
    j.max_translation = 3.5;
    EXPECT_THROW(j.validate(), std::invalid_argument);
    j = MotionJitter{};
    j.max_rotation_deg = 2.5;
    EXPECT_THROW(j.validate(), std::invalid_argument);
}

TEST(Synth, TrajectoryStartsAtIdentity) {
    std::mt19937_64 rng(1);
    const auto poses = sample_trajectory(5, MotionJitter{}, rng);
    ASSERT_EQ(poses.size(), 5U);
    EXPECT_EQ(poses[0].tx, 0.0);
    EXPECT_EQ(poses[0].ty, 0.0);
    EXPECT_EQ(poses[0].theta, 0.0);
    for (std::size_t i = 1; i < poses.size(); ++i) {
        EXPECT_LE(std::abs(poses[i].tx - poses[i - 1].tx), 1.5);
    }
}

TEST(Synth, SourceClipNeedsTwoFrames) {
    auto src = make_procedural_clip("c", 2, 32, 32, 1);
    src.frames = src.frames.slice(0, 0, 1);
    SynthSetup s;
    EXPECT_THROW(synthesize_clip(src, s.bank, s.stroke, s.smooth, MotionJitter{}, 0), std::invalid_argument);
}

TEST(Synth, FitPatchCropsToAspectAndResizes) {
    const auto img = torch::rand({3, 40, 80});
    const auto out = fit_patch(img, 32, 32);
    EXPECT_EQ(out.sizes(), (std::vector<std::int64_t>{3, 32, 32}));
}
