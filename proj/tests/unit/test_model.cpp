#include "svi/model/binarize.hpp"
#include "svi/model/deform_conv.hpp"
#include "svi/model/networks.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace svi;
using namespace svi::model;

TEST(Encoder, StrideFourShapesAndDeterminism) {
    torch::manual_seed(0);
    FrameEncoder enc(3, 16, 2);
    const auto x = torch::rand({1, 3, 64, 64});
    const auto f = enc(x);
    EXPECT_EQ(f.sizes(), (std::vector<std::int64_t>{1, 16, 16, 16}));
    EXPECT_TRUE(torch::equal(f, enc(x.clone())));
    EXPECT_TRUE(torch::isfinite(enc(torch::zeros({1, 3, 64, 64}))).all().item<bool>());
}

TEST(Decoder, RestoresFullResolutionInUnitRange) {
    torch::manual_seed(0);
    InpaintingModel m(test::tiny_config(16));
    const auto feature = torch::randn({1, 16, 16, 16}) * 10.0;
    const auto frame = m->completion()->decode(feature, 64, 64);
    EXPECT_EQ(frame.sizes(), (std::vector<std::int64_t>{1, 3, 64, 64}));
    EXPECT_GE(frame.min().item<float>(), 0.0F);
    EXPECT_LE(frame.max().item<float>(), 1.0F);
    EXPECT_TRUE(torch::equal(frame, m->completion()->decode(feature, 64, 64)));
}

TEST(Dca, FreshBlockIsIdentity) {
    torch::manual_seed(0);
    DcaBlock block(6);
    const auto src = torch::randn({2, 6, 8, 8});
    const auto tgt = torch::randn({2, 6, 8, 8});
    EXPECT_LT((block(src, tgt) - src).abs().max().item<float>(), 1e-6);
    EXPECT_EQ(block->predict_offsets(src, tgt).abs().max().item<float>(), 0.0F);
}

TEST(Dca, ZeroOffsetPredictorDegeneratesToPlainConvolution) {
    torch::manual_seed(1);
    DcaBlock block(4);
    {
        torch::NoGradGuard g;
        block->kernel().copy_(torch::randn({4, 4, 3, 3}));
        block->kernel_bias().copy_(torch::randn({4}));
        block->offset_hidden()->weight.normal_();
        block->offset_out()->weight.zero_();
        block->offset_out()->bias.zero_();
    }
    const auto src = torch::randn({1, 4, 7, 9});
    const auto tgt = torch::randn({1, 4, 7, 9});
    const auto ref = torch::conv2d(src, block->kernel(), block->kernel_bias(), 1, 1);
    EXPECT_LT((block(src, tgt) - ref).abs().max().item<float>(), 1e-5);
}

TEST(Alignment, CascadeOfIdentityBlocksAndEmptyCascade) {
    torch::manual_seed(2);
    for (std::int64_t n : {0, 1, 4, 6}) {
        FeatureAlignment a(5, n);
        EXPECT_EQ(a->size(), static_cast<std::size_t>(n));
        const auto src = torch::randn({1, 5, 6, 6});
        const auto out = a(src, torch::randn({1, 5, 6, 6}));
        EXPECT_LT((out - src).abs().max().item<float>(), 1e-5) << n;
        if (n == 0) {
            EXPECT_TRUE(torch::equal(out, src));
        }
        EXPECT_TRUE(torch::equal(out, a(src, torch::randn({1, 5, 6, 6})))) << "identity ignores the target";
    }
    ModelConfig c;
    c.dca_blocks = 7;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Alignment, DeterministicWithTrainedOffsets) {
    torch::manual_seed(3);
    FeatureAlignment a(4, 2);
    {
        torch::NoGradGuard g;
        for (std::size_t i = 0; i < a->size(); ++i) {
            a->block(i)->offset_out()->weight.normal_(0.0, 0.1);
        }
    }
    const auto src = torch::randn({1, 4, 8, 8});
    const auto tgt = torch::randn({1, 4, 8, 8});
    EXPECT_TRUE(torch::equal(a(src, tgt), a(src, tgt)));
}

TEST(Aggregation, WeightsSumToOneForAnyReferenceCount) {
    torch::manual_seed(4);
    for (std::int64_t r = 1; r <= 4; ++r) {
        TemporalAggregation agg(8, r);
        std::vector<torch::Tensor> refs;
        for (std::int64_t i = 0; i < r; ++i) {
            refs.push_back(torch::randn({2, 8, 5, 6}) * 3.0);
        }
        const auto s = agg->attention(torch::randn({2, 8, 5, 6}) * 3.0, refs);
        EXPECT_EQ(s.sizes(), (std::vector<std::int64_t>{2, r, 5, 6}));
        EXPECT_LT((s.sum(1) - 1.0).abs().max().item<float>(), 1e-5);
    }
}

namespace {

/// Q and K become identities on a single channel so the logit is f_t * f_r.
TemporalAggregation unit_aggregation(std::int64_t refs) {
    TemporalAggregation agg(1, refs);
    torch::NoGradGuard g;
    agg->query()->weight.fill_(1.0);
    agg->query()->bias.zero_();
    agg->key()->weight.fill_(1.0);
    agg->key()->bias.zero_();
    return agg;
}

}  // namespace

TEST(Aggregation, ClosedFormSoftmaxExamples) {
    auto agg = unit_aggregation(2);
    const auto target = torch::ones({1, 1, 2, 2});
    const auto equal = agg->attention(target, {torch::full({1, 1, 2, 2}, 0.3), torch::full({1, 1, 2, 2}, 0.3)});
    EXPECT_LT((equal - 0.5).abs().max().item<float>(), 1e-6);
    const auto w = agg->attention(target, {torch::zeros({1, 1, 2, 2}), torch::full({1, 1, 2, 2}, std::log(3.0))});
    EXPECT_NEAR(w[0][0][0][0].item<double>(), 0.25, 1e-6);
    EXPECT_NEAR(w[0][1][1][1].item<double>(), 0.75, 1e-6);
}

TEST(Aggregation, SingleReferenceUsesValueDirectly) {
    torch::manual_seed(5);
    TemporalAggregation agg(3, 1);
    const auto target = torch::randn({1, 3, 4, 4});
    const auto ref = torch::randn({1, 3, 4, 4});
    const auto mask = torch::rand({1, 1, 4, 4});
    const auto out = agg->forward(target, {ref}, mask);
    EXPECT_TRUE(torch::allclose(out.weights, torch::ones({1, 1, 4, 4})));
    const auto expected = agg->fusion()(torch::cat({agg->value()(ref), target, mask}, 1));
    EXPECT_LT((out.fused - expected).abs().max().item<float>(), 1e-6);
    EXPECT_ANY_THROW(agg->forward(target, {}, mask));
}

TEST(Completion, PasteBackIdentity) {
    torch::manual_seed(6);
    InpaintingModel m(test::tiny_config());
    const auto x = torch::rand({1, 3, 32, 32});
    const std::vector<torch::Tensor> refs = {torch::rand({1, 3, 32, 32}), torch::rand({1, 3, 32, 32})};
    const auto none = m->completion()->forward(refs, x, torch::zeros({1, 1, 32, 32}));
    EXPECT_TRUE(torch::equal(none.completed, x));
    const auto all = m->completion()->forward(refs, x, torch::ones({1, 1, 32, 32}));
    EXPECT_TRUE(torch::equal(all.completed, all.decoded));
    auto mask = torch::zeros({1, 1, 32, 32});
    mask.index_put_({0, 0, torch::indexing::Slice(4, 20), torch::indexing::Slice(8, 12)}, 1.0);
    const auto some = m->completion()->forward(refs, x, mask);
    const auto outside = mask.eq(0).expand_as(x);
    EXPECT_TRUE(torch::equal(some.completed.masked_select(outside), x.masked_select(outside)));
}

TEST(Completion, OddFrameSizesRoundTrip) {
    torch::manual_seed(7);
    InpaintingModel m(test::tiny_config());
    const auto x = torch::rand({1, 3, 30, 37});
    const auto out = m->completion()->forward({x, x}, x, torch::ones({1, 1, 30, 37}));
    EXPECT_EQ(out.completed.sizes(), x.sizes());
    EXPECT_EQ(out.feature.size(2), 8);
    EXPECT_EQ(out.feature.size(3), 10);
    const auto soft = m->mask_prediction()->forward(x, out.completed, out.feature);
    EXPECT_EQ(soft.sizes(), (std::vector<std::int64_t>{1, 1, 30, 37}));
}

TEST(MaskPrediction, SaturatedHeadGivesEmptyMask) {
    torch::manual_seed(8);
    InpaintingModel m(test::tiny_config());
    {
        torch::NoGradGuard g;
        m->mask_prediction()->decoder()->head()->bias.fill_(-1e4);
    }
    const auto x = torch::rand({1, 3, 16, 16});
    const auto c = m->completion()->forward({x, x}, x, torch::zeros({1, 1, 16, 16}));
    const auto soft = m->mask_prediction()->forward(x, c.completed, c.feature);
    EXPECT_LT(soft.max().item<float>(), 1e-6);
    EXPECT_GE(soft.min().item<float>(), 0.0F);
    EXPECT_TRUE(torch::equal(soft, m->mask_prediction()->forward(x, c.completed, c.feature)));
    EXPECT_ANY_THROW(m->mask_prediction()->forward(x, c.completed, torch::Tensor()));
}

TEST(MaskPrediction, AlignmentStorageIsShared) {
    InpaintingModel m(test::tiny_config(8, 2));
    auto a = m->completion()->alignment()->parameters();
    auto b = m->mask_prediction()->alignment()->parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].data_ptr(), b[i].data_ptr());
    }
    // the joint parameter list counts the shared module once
    std::set<void*> unique;
    for (const auto& p : m->parameters()) {
        unique.insert(p.data_ptr());
    }
    EXPECT_EQ(unique.size(), m->parameters().size());
}

TEST(Binarize, ThresholdRules) {
    EXPECT_TRUE(torch::equal(binarize_mask(torch::full({1, 2, 2}, 0.9)), torch::ones({1, 2, 2})));
    EXPECT_TRUE(torch::equal(binarize_mask(torch::full({1, 2, 2}, 0.1)), torch::zeros({1, 2, 2})));
    EXPECT_TRUE(torch::equal(binarize_mask(torch::full({1, 2, 2}, 0.5)), torch::ones({1, 2, 2})));
    const auto soft = torch::rand({1, 8, 8});
    EXPECT_TRUE(torch::equal(binarize_mask(binarize_mask(soft)), binarize_mask(soft)));
    EXPECT_ANY_THROW(binarize_mask(soft, 1.0));
}

TEST(Binarize, StraightThroughPassesGradientUnchanged) {
    auto soft = torch::rand({1, 4, 4}, torch::requires_grad());
    const auto hard = straight_through_binarize(soft);
    EXPECT_TRUE(torch::equal(hard.detach(), binarize_mask(soft.detach())));
    const auto upstream = torch::randn({1, 4, 4});
    (hard * upstream).sum().backward();
    EXPECT_TRUE(torch::allclose(soft.grad(), upstream));
}
