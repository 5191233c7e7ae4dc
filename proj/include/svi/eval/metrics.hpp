#pragma once

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <filesystem>
#include <string>
#include <vector>

namespace svi::eval {

inline constexpr double kPsnrCap = 99.0;
inline constexpr std::int64_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// 10 log10(1 / mse), capped at 99 dB (identical frames hit the cap).
double psnr(const torch::Tensor& a, const torch::Tensor& b);
double psnr_from_mse(double mse);

/// Sum of squared differences and number of compared values inside `mask`
/// ([1,H,W] or [T,1,H,W], broadcast over channels).
struct SquaredError {
    double sum = 0.0;
    double count = 0.0;

    double mse() const { return count > 0.0 ? sum / count : 0.0; }
    SquaredError& operator+=(const SquaredError& o) {
        sum += o.sum;
        count += o.count;
        return *this;
    }
};
SquaredError masked_squared_error(const torch::Tensor& a, const torch::Tensor& b, const torch::Tensor& mask);

/// Single-scale SSIM of [C,H,W] frames in [0,1]; mean over valid windows and channels.
double ssim(const torch::Tensor& a, const torch::Tensor& b);

/// |pred and gt| / |pred or gt|; 1 when both are empty. Inputs must hold only 0 and 1.
double iou(const torch::Tensor& pred, const torch::Tensor& gt);

/// Same function as the training mask loss.
double bce_mask(const torch::Tensor& pred_soft, const torch::Tensor& gt);

struct ClipMetrics {
    std::string clip_id;
    std::int64_t frames = 0;
    double psnr = 0.0;
    double ssim = 0.0;
    double iou = 0.0;
    double bce = 0.0;

    nlohmann::json to_json() const;
};

struct EvalReport {
    std::vector<ClipMetrics> clips;
    ClipMetrics corpus;  ///< frame-weighted means, clip_id "corpus"

    /// One JSON object per clip followed by the corpus line.
    std::string to_jsonl() const;
    std::string to_table() const;
};

/// Frame-weighted corpus means of already computed per-clip values.
ClipMetrics aggregate(const std::vector<ClipMetrics>& clips);

/// Per-frame metrics of a completed clip against its ground truth.
/// `frames`, `gt_frames`: [T,3,H,W]; masks [T,1,H,W].
ClipMetrics evaluate_clip(const std::string& clip_id, const torch::Tensor& frames, const torch::Tensor& gt_frames,
                          const torch::Tensor& masks, const torch::Tensor& soft_masks,
                          const torch::Tensor& gt_masks);

/// Pairs result clips with dataset clips by id. Any missing clip, length or
/// size mismatch is collected and reported together in one IoError.
EvalReport evaluate_corpus(const std::filesystem::path& results, const std::filesystem::path& gt);

}  // namespace svi::eval
