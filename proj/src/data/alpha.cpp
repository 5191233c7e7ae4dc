#include "svi/data/alpha.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace svi::data {

namespace F = torch::nn::functional;

void SmoothSpec::validate() const {
    if (iterations < 1) {
        throw std::invalid_argument("smooth.iterations: must be >= 1");
    }
    if (kernel_radius < 1) {
        throw std::invalid_argument("smooth.kernel_radius: must be >= 1");
    }
    if (!(kernel_sigma > 0.0)) {
        throw std::invalid_argument("smooth.kernel_sigma: must be > 0");
    }
}

torch::Tensor gaussian_kernel1d(int radius, double sigma) {
    auto taps = torch::arange(-radius, radius + 1, torch::kFloat64);
    auto kernel = torch::exp(-(taps * taps) / (2.0 * sigma * sigma));
    return kernel / kernel.sum();
}

namespace {

// Clamps alpha so it never rises from a pixel to a neighbour farther from the mask.
// The blur of a non-convex support bulges where two stroke parts are close, which
// would otherwise let alpha increase along a ray that moves away from the mask.
void enforce_distance_monotone(torch::Tensor& alpha, const torch::Tensor& support) {
    const int h = static_cast<int>(support.size(0));
    const int w = static_cast<int>(support.size(1));
    const auto sup = support.to(torch::kUInt8).contiguous();
    cv::Mat outside(h, w, CV_8U);
    std::memcpy(outside.data, sup.data_ptr<std::uint8_t>(), static_cast<std::size_t>(h) * w);
    outside = 1 - outside;
    cv::Mat dist;
    cv::distanceTransform(outside, dist, cv::DIST_L2, cv::DIST_MASK_PRECISE, CV_32F);

    std::vector<std::int64_t> d2(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        const auto* row = dist.ptr<float>(y);
        for (int x = 0; x < w; ++x) {
            const double d = row[x];
            d2[static_cast<std::size_t>(y) * w + x] = std::llround(d * d);
        }
    }
    std::vector<std::int64_t> order(d2.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d2[a] < d2[b]; });

    auto* a = alpha.data_ptr<double>();
    for (const auto p : order) {
        if (d2[p] == 0) {
            continue;
        }
        const auto y = static_cast<int>(p / w);
        const auto x = static_cast<int>(p % w);
        double cap = a[p];
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int ny = y + dy;
                const int nx = x + dx;
                if ((dy == 0 && dx == 0) || ny < 0 || nx < 0 || ny >= h || nx >= w) {
                    continue;
                }
                const auto q = static_cast<std::int64_t>(ny) * w + nx;
                if (d2[q] < d2[p]) {
                    cap = std::min(cap, a[q]);
                }
            }
        }
        a[p] = cap;
    }
}

}  // namespace

torch::Tensor extend_mask_alpha(const torch::Tensor& mask, const SmoothSpec& spec) {
    spec.validate();
    TORCH_CHECK(mask.dim() == 3 && mask.size(0) == 1, "expected a [1,H,W] mask, got ", mask.sizes());
    const auto support = mask.gt(0.5).to(torch::kFloat64).unsqueeze(0);
    const auto k = gaussian_kernel1d(spec.kernel_radius, spec.kernel_sigma);
    const auto kx = k.view({1, 1, 1, -1});
    const auto ky = k.view({1, 1, -1, 1});
    const auto r = static_cast<std::int64_t>(spec.kernel_radius);

    auto alpha = support.clone();
    for (int i = 0; i < spec.iterations; ++i) {
        alpha = F::conv2d(alpha, kx, F::Conv2dFuncOptions().padding(torch::IntArrayRef{0, r}));
        alpha = F::conv2d(alpha, ky, F::Conv2dFuncOptions().padding(torch::IntArrayRef{r, 0}));
        alpha = torch::maximum(alpha, support);
    }
    alpha = alpha.clamp(0.0, 1.0).squeeze(0).squeeze(0).contiguous();
    enforce_distance_monotone(alpha, support.squeeze(0).squeeze(0));
    return alpha.unsqueeze(0).to(torch::kFloat32);
}

torch::Tensor composite_frame(const torch::Tensor& clean, const torch::Tensor& noise,
                              const torch::Tensor& alpha) {
    TORCH_CHECK(clean.sizes() == noise.sizes(), "clean/noise size mismatch: ", clean.sizes(),
                " vs ", noise.sizes());
    TORCH_CHECK(alpha.dim() == clean.dim() && alpha.size(-1) == clean.size(-1) &&
                    alpha.size(-2) == clean.size(-2),
                "alpha size mismatch: ", alpha.sizes(), " vs ", clean.sizes());
    return ((1.0 - alpha) * clean + alpha * noise).clamp(0.0, 1.0);
}

}  // namespace svi::data
