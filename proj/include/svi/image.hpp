#pragma once

// Frames travel through the code base as float32 tensors of shape [3, H, W]
// with values in [0, 1]. Masks use [1, H, W]: binary masks hold exactly 0 or
// 1, alpha and soft masks hold values in [0, 1]. On disk everything is 8-bit
// lossless PNG.

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace svi {

torch::Tensor read_frame_png(const std::filesystem::path& path);
torch::Tensor read_mask_png(const std::filesystem::path& path);

/// Writes a [1,H,W] or [3,H,W] tensor as 8-bit PNG, rounding to nearest.
void write_png(const std::filesystem::path& path, const torch::Tensor& image);

std::vector<std::uint8_t> encode_png(const torch::Tensor& image);
/// Decodes PNG bytes into a tensor with `channels` channels (1 or 3).
torch::Tensor decode_png(std::span<const std::uint8_t> bytes, int channels);

/// Round-trips values through the 8-bit storage grid.
torch::Tensor quantize8(const torch::Tensor& image);

/// Zero-padded five digit file name used for every per-frame image.
std::string frame_file_name(std::int64_t index);

/// Reads `count` consecutive per-frame images from `dir` into [count,channels,H,W].
torch::Tensor read_stack(const std::filesystem::path& dir, std::int64_t count, int channels);
void write_stack(const std::filesystem::path& dir, const torch::Tensor& stack);
/// Number of consecutive per-frame images 00000.png, 00001.png, ... in `dir`.
std::int64_t count_frames(const std::filesystem::path& dir);

}  // namespace svi
