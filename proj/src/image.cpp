#include "svi/image.hpp"

#include "svi/error.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstdio>

namespace svi {
namespace {

torch::Tensor mat_to_tensor(const cv::Mat& mat, int channels) {
    cv::Mat converted;
    if (channels == 3) {
        if (mat.channels() == 1) {
            cv::cvtColor(mat, converted, cv::COLOR_GRAY2RGB);
        } else if (mat.channels() == 4) {
            cv::cvtColor(mat, converted, cv::COLOR_BGRA2RGB);
        } else {
            cv::cvtColor(mat, converted, cv::COLOR_BGR2RGB);
        }
    } else {
        if (mat.channels() == 3) {
            cv::cvtColor(mat, converted, cv::COLOR_BGR2GRAY);
        } else if (mat.channels() == 4) {
            cv::cvtColor(mat, converted, cv::COLOR_BGRA2GRAY);
        } else {
            converted = mat;
        }
    }
    if (converted.depth() != CV_8U) {
        throw std::invalid_argument("only 8-bit images are supported");
    }
    converted = converted.clone();
    auto hwc = torch::from_blob(converted.data, {converted.rows, converted.cols, channels},
                                torch::kUInt8);
    return hwc.permute({2, 0, 1}).to(torch::kFloat32).div(255.0).contiguous();
}

cv::Mat tensor_to_mat(const torch::Tensor& image) {
    TORCH_CHECK(image.dim() == 3 && (image.size(0) == 1 || image.size(0) == 3),
                "expected a [1,H,W] or [3,H,W] image, got ", image.sizes());
    auto bytes = image.detach().to(torch::kCPU, torch::kFloat32)
                     .clamp(0.0, 1.0).mul(255.0).round().to(torch::kUInt8)
                     .permute({1, 2, 0}).contiguous();
    const int rows = static_cast<int>(bytes.size(0));
    const int cols = static_cast<int>(bytes.size(1));
    const int channels = static_cast<int>(bytes.size(2));
    cv::Mat mat(rows, cols, CV_8UC(channels), bytes.data_ptr<std::uint8_t>());
    cv::Mat out;
    if (channels == 3) {
        cv::cvtColor(mat, out, cv::COLOR_RGB2BGR);
    } else {
        out = mat.clone();
    }
    return out;
}

torch::Tensor read_png(const std::filesystem::path& path, int channels) {
    if (!std::filesystem::exists(path)) {
        throw IoError(path, "missing image file");
    }
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) {
        throw IoError(path, "unreadable image file");
    }
    return mat_to_tensor(mat, channels);
}

}  // namespace

torch::Tensor read_frame_png(const std::filesystem::path& path) { return read_png(path, 3); }

torch::Tensor read_mask_png(const std::filesystem::path& path) { return read_png(path, 1); }

void write_png(const std::filesystem::path& path, const torch::Tensor& image) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    // Maximum-effort compression keeps files small; the encoder is deterministic.
    const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 9};
    if (!cv::imwrite(path.string(), tensor_to_mat(image), params)) {
        throw IoError(path, "failed to write image");
    }
}

std::vector<std::uint8_t> encode_png(const torch::Tensor& image) {
    std::vector<std::uint8_t> out;
    const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 9};
    if (!cv::imencode(".png", tensor_to_mat(image), out, params)) {
        throw std::runtime_error("png encoding failed");
    }
    return out;
}

torch::Tensor decode_png(std::span<const std::uint8_t> bytes, int channels) {
    if (bytes.empty()) {
        throw std::invalid_argument("empty image payload");
    }
    cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat mat = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
    if (mat.empty()) {
        throw std::invalid_argument("payload is not a decodable image");
    }
    return mat_to_tensor(mat, channels);
}

torch::Tensor quantize8(const torch::Tensor& image) {
    return image.clamp(0.0, 1.0).mul(255.0).round().div(255.0).to(image.scalar_type());
}

std::string frame_file_name(std::int64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%05lld.png", static_cast<long long>(index));
    return buf;
}

torch::Tensor read_stack(const std::filesystem::path& dir, std::int64_t count, int channels) {
    std::vector<torch::Tensor> items;
    items.reserve(static_cast<std::size_t>(count));
    for (std::int64_t t = 0; t < count; ++t) {
        items.push_back(read_png(dir / frame_file_name(t), channels));
    }
    if (items.empty()) {
        throw IoError(dir, "no frames to read");
    }
    return torch::stack(items);
}

void write_stack(const std::filesystem::path& dir, const torch::Tensor& stack) {
    for (std::int64_t t = 0; t < stack.size(0); ++t) {
        write_png(dir / frame_file_name(t), stack[t]);
    }
}

std::int64_t count_frames(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError(dir, "missing frame directory");
    }
    std::int64_t n = 0;
    while (std::filesystem::exists(dir / frame_file_name(n))) {
        ++n;
    }
    return n;
}

}  // namespace svi
