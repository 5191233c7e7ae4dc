#include "svi/data/procedural.hpp"

#include "svi/error.hpp"
#include "svi/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace svi::data {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<std::filesystem::path> sorted_pngs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError(dir, "missing directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

SourceClip make_procedural_clip(const std::string& clip_id, std::int64_t length, std::int64_t height,
                                std::int64_t width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const double speed = uniform(rng, 0.6, 1.6);
    const double heading = uniform(rng, 0.0, kTwoPi);
    const double vx = speed * std::cos(heading);
    const double vy = speed * std::sin(heading);

    struct Wave {
        double fx, fy, phase, amp;
    };
    std::array<std::vector<Wave>, 3> waves;
    std::array<double, 3> base{};
    for (int c = 0; c < 3; ++c) {
        base[static_cast<std::size_t>(c)] = uniform(rng, 0.25, 0.75);
        for (int k = 0; k < 3; ++k) {
            waves[static_cast<std::size_t>(c)].push_back(
                {uniform(rng, -1.5, 1.5) / static_cast<double>(width),
                 uniform(rng, -1.5, 1.5) / static_cast<double>(height), uniform(rng, 0.0, kTwoPi),
                 uniform(rng, 0.05, 0.15)});
        }
    }
    struct Blob {
        double cx, cy, rx, ry;
        std::array<double, 3> colour;
    };
    std::vector<Blob> blobs;
    const int blob_count = 3 + static_cast<int>(rng() % 3);
    for (int b = 0; b < blob_count; ++b) {
        blobs.push_back({uniform(rng, 0.0, static_cast<double>(width)),
                         uniform(rng, 0.0, static_cast<double>(height)),
                         uniform(rng, 0.08, 0.22) * static_cast<double>(width),
                         uniform(rng, 0.08, 0.22) * static_cast<double>(height),
                         {uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)}});
    }

    auto frames = torch::empty({length, 3, height, width}, torch::kFloat32);
    auto acc = frames.accessor<float, 4>();
    for (std::int64_t t = 0; t < length; ++t) {
        for (std::int64_t y = 0; y < height; ++y) {
            for (std::int64_t x = 0; x < width; ++x) {
                // The scene pans: sample world coordinates shifted by the camera.
                const double wx = static_cast<double>(x) + vx * static_cast<double>(t);
                const double wy = static_cast<double>(y) + vy * static_cast<double>(t);
                std::array<double, 3> rgb{};
                for (std::size_t c = 0; c < 3; ++c) {
                    double v = base[c];
                    for (const auto& w : waves[c]) {
                        v += w.amp * std::sin(kTwoPi * (w.fx * wx + w.fy * wy) + w.phase);
                    }
                    rgb[c] = v;
                }
                for (const auto& b : blobs) {
                    const double dx = (wx - b.cx) / b.rx;
                    const double dy = (wy - b.cy) / b.ry;
                    const double weight = std::exp(-1.5 * (dx * dx + dy * dy));
                    for (std::size_t c = 0; c < 3; ++c) {
                        rgb[c] = (1.0 - weight) * rgb[c] + weight * b.colour[c];
                    }
                }
                for (std::size_t c = 0; c < 3; ++c) {
                    acc[t][static_cast<std::int64_t>(c)][y][x] =
                        static_cast<float>(std::clamp(rgb[c], 0.0, 1.0));
                }
            }
        }
    }
    // Stored data is 8-bit, so keep the ground truth on the 8-bit grid too.
    return SourceClip{clip_id, quantize8(frames), 24.0};
}

NoiseBank make_procedural_noise_bank(std::size_t count, std::int64_t height, std::int64_t width,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    NoiseBank bank;
    for (std::size_t k = 0; k < count; ++k) {
        const double angle = uniform(rng, 0.0, std::numbers::pi);
        const double period = uniform(rng, 3.0, 7.0);
        const double phase = uniform(rng, 0.0, kTwoPi);
        const std::array<double, 3> c0{uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)};
        const std::array<double, 3> c1{uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)};
        auto patch = torch::empty({3, height, width}, torch::kFloat32);
        auto acc = patch.accessor<float, 3>();
        std::normal_distribution<double> grain(0.0, 0.06);
        for (std::int64_t y = 0; y < height; ++y) {
            for (std::int64_t x = 0; x < width; ++x) {
                const double u = static_cast<double>(x) * std::cos(angle) + static_cast<double>(y) * std::sin(angle);
                const double w = 0.5 + 0.5 * std::sin(kTwoPi * u / period + phase);
                for (std::size_t c = 0; c < 3; ++c) {
                    const double v = (1.0 - w) * c0[c] + w * c1[c] + grain(rng);
                    acc[static_cast<std::int64_t>(c)][y][x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
                }
            }
        }
        bank.patches.push_back(quantize8(patch));
        bank.source_ids.push_back("noise-" + std::to_string(k));
    }
    return bank;
}

SourceClip load_source_clip(const std::filesystem::path& dir) {
    const auto files = sorted_pngs(dir);
    if (files.size() < 2) {
        throw IoError(dir, "source clip needs at least 2 PNG frames");
    }
    std::vector<torch::Tensor> frames;
    for (const auto& f : files) {
        frames.push_back(read_frame_png(f));
        if (frames.back().sizes() != frames.front().sizes()) {
            throw IoError(f, "frame dimensions differ from the first frame");
        }
    }
    return SourceClip{dir.filename().string(), torch::stack(frames), 24.0};
}

NoiseBank load_noise_bank(const std::filesystem::path& dir) {
    NoiseBank bank;
    for (const auto& f : sorted_pngs(dir)) {
        bank.patches.push_back(read_frame_png(f));
        bank.source_ids.push_back(dir.filename().string() + "/" + f.stem().string());
    }
    if (bank.patches.empty()) {
        throw IoError(dir, "noise directory holds no PNG images");
    }
    return bank;
}

}  // namespace svi::data
