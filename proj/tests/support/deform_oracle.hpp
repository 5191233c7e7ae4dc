#pragma once

#include <torch/torch.h>

#include <cmath>

namespace svi::test {

inline double at(const torch::Tensor& f, std::int64_t c, std::int64_t y, std::int64_t x) {
    if (y < 0 || x < 0 || y >= f.size(1) || x >= f.size(2)) {
        return 0.0;
    }
    return f[c][y][x].item<double>();
}

/// Bilinear value from the four integer neighbours, zero outside.
inline double bilinear(const torch::Tensor& f, std::int64_t c, double x, double y) {
    const auto x0 = static_cast<std::int64_t>(std::floor(x));
    const auto y0 = static_cast<std::int64_t>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    return (1 - fx) * (1 - fy) * at(f, c, y0, x0) + fx * (1 - fy) * at(f, c, y0, x0 + 1) +
           (1 - fx) * fy * at(f, c, y0 + 1, x0) + fx * fy * at(f, c, y0 + 1, x0 + 1);
}

/// Direct summation over taps and input channels. `source` is [Ci,H,W],
/// `offsets` [18,H,W], `weight` [Co,Ci,3,3].
inline torch::Tensor direct_deform(const torch::Tensor& source, const torch::Tensor& offsets, const torch::Tensor& weight) {
    const auto ci = source.size(0);
    const auto h = source.size(1);
    const auto w = source.size(2);
    const auto co = weight.size(0);
    auto out = torch::zeros({co, h, w}, torch::kFloat64);
    for (std::int64_t o = 0; o < co; ++o) {
        for (std::int64_t y = 0; y < h; ++y) {
            for (std::int64_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int ky = -1; ky <= 1; ++ky) {
                    for (int kx = -1; kx <= 1; ++kx) {
                        const int n = (ky + 1) * 3 + (kx + 1);
                        const double dx = offsets[2 * n][y][x].item<double>();
                        const double dy = offsets[2 * n + 1][y][x].item<double>();
                        for (std::int64_t i = 0; i < ci; ++i) {
                            acc += weight[o][i][ky + 1][kx + 1].item<double>() *
                                   bilinear(source, i, static_cast<double>(x + kx) + dx, static_cast<double>(y + ky) + dy);
                        }
                    }
                }
                out[o][y][x] = acc;
            }
        }
    }
    return out;
}

}  // namespace svi::test
