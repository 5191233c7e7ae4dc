#include "svi/model/deform_conv.hpp"

namespace svi::model {

torch::Tensor bilinear_gather(const torch::Tensor& feature, const torch::Tensor& x,
                              const torch::Tensor& y) {
    TORCH_CHECK(feature.dim() == 4, "feature must be [B,C,H,W], got ", feature.sizes());
    TORCH_CHECK(x.dim() == 4 && x.sizes() == y.sizes() && x.size(0) == feature.size(0),
                "positions must be [B,K,Ho,Wo] and agree, got ", x.sizes(), " and ", y.sizes());
    const auto batch = feature.size(0);
    const auto channels = feature.size(1);
    const auto height = feature.size(2);
    const auto width = feature.size(3);
    const auto out_shape = std::vector<std::int64_t>{batch, channels, x.size(1), x.size(2), x.size(3)};

    const auto flat = feature.reshape({batch, channels, height * width});
    const auto x0 = x.detach().floor();
    const auto y0 = y.detach().floor();
    const auto fx = x - x0;
    const auto fy = y - y0;

    auto corner = [&](const torch::Tensor& xi, const torch::Tensor& yi, const torch::Tensor& weight) {
        const auto inside = xi.ge(0).logical_and(xi.le(width - 1))
                                .logical_and(yi.ge(0)).logical_and(yi.le(height - 1));
        const auto index = (yi.clamp(0, height - 1) * width + xi.clamp(0, width - 1))
                               .to(torch::kLong)
                               .reshape({batch, 1, -1})
                               .expand({batch, channels, -1});
        const auto values = flat.gather(2, index).view(out_shape);
        return values * (weight * inside.to(weight.scalar_type())).unsqueeze(1);
    };

    const auto x1 = x0 + 1;
    const auto y1 = y0 + 1;
    return corner(x0, y0, (1 - fx) * (1 - fy)) + corner(x1, y0, fx * (1 - fy)) +
           corner(x0, y1, (1 - fx) * fy) + corner(x1, y1, fx * fy);
}

torch::Tensor bilinear_sample(const torch::Tensor& feature, double x, double y) {
    TORCH_CHECK(feature.dim() == 3, "feature must be [C,H,W], got ", feature.sizes());
    const auto opts = feature.options();
    const auto px = torch::full({1, 1, 1, 1}, x, opts);
    const auto py = torch::full({1, 1, 1, 1}, y, opts);
    return bilinear_gather(feature.unsqueeze(0), px, py).reshape({feature.size(0)});
}

torch::Tensor deform_conv2d(const torch::Tensor& source, const torch::Tensor& offsets,
                            const torch::Tensor& weight, const torch::Tensor& bias) {
    TORCH_CHECK(source.dim() == 4, "source must be [B,C,H,W], got ", source.sizes());
    TORCH_CHECK(weight.dim() == 4 && weight.size(1) == source.size(1) && weight.size(2) == 3 &&
                    weight.size(3) == 3,
                "weight must be [Cout,", source.size(1), ",3,3], got ", weight.sizes());
    const auto batch = source.size(0);
    const auto height = source.size(2);
    const auto width = source.size(3);
    TORCH_CHECK(offsets.dim() == 4 && offsets.size(0) == batch && offsets.size(1) == 2 * kTaps &&
                    offsets.size(2) == height && offsets.size(3) == width,
                "offsets must be [", batch, ",18,", height, ",", width, "], got ", offsets.sizes());

    const auto opts = source.options();
    const auto taps = torch::arange(-1, 2, opts);
    // Regular grid R: ky varies slowest, matching the conv weight layout.
    const auto tap_y = taps.view({3, 1}).expand({3, 3}).reshape({1, kTaps, 1, 1});
    const auto tap_x = taps.view({1, 3}).expand({3, 3}).reshape({1, kTaps, 1, 1});
    const auto grid_y = torch::arange(height, opts).view({1, 1, height, 1});
    const auto grid_x = torch::arange(width, opts).view({1, 1, 1, width});

    const auto pairs = offsets.view({batch, kTaps, 2, height, width});
    const auto px = grid_x + tap_x + pairs.select(2, 0);
    const auto py = grid_y + tap_y + pairs.select(2, 1);

    const auto sampled = bilinear_gather(source, px, py)
                             .reshape({batch, source.size(1) * kTaps, height * width});
    auto out = weight.reshape({weight.size(0), -1}).matmul(sampled)
                   .view({batch, weight.size(0), height, width});
    if (bias.defined()) {
        out = out + bias.view({1, -1, 1, 1});
    }
    return out;
}

}  // namespace svi::model
