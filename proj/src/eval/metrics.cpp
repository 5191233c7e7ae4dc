#include "svi/eval/metrics.hpp"

#include "svi/data/dataset.hpp"
#include "svi/error.hpp"
#include "svi/image.hpp"
#include "svi/infer/io.hpp"
#include "svi/train/losses.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace svi::eval {
namespace {

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
    if (a.sizes() != b.sizes()) {
        std::ostringstream msg;
        msg << what << ": shape mismatch " << a.sizes() << " vs " << b.sizes();
        throw std::invalid_argument(msg.str());
    }
}

torch::Tensor gaussian_window() {
    auto x = torch::arange(kSsimWindow, torch::kFloat64) - static_cast<double>(kSsimWindow / 2);
    auto g = torch::exp(-(x * x) / (2.0 * kSsimSigma * kSsimSigma));
    g = g / g.sum();
    return torch::outer(g, g).view({1, 1, kSsimWindow, kSsimWindow});
}

}  // namespace

double psnr_from_mse(double mse) {
    if (mse <= 0.0) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
    check_same_shape(a, b, "psnr");
    const auto diff = a.to(torch::kFloat64) - b.to(torch::kFloat64);
    return psnr_from_mse(diff.square().mean().item<double>());
}

SquaredError masked_squared_error(const torch::Tensor& a, const torch::Tensor& b, const torch::Tensor& mask) {
    check_same_shape(a, b, "masked_squared_error");
    const auto m = mask.to(torch::kFloat64).expand_as(a);
    const auto diff = (a.to(torch::kFloat64) - b.to(torch::kFloat64)).square() * m;
    return {diff.sum().item<double>(), m.sum().item<double>()};
}

double ssim(const torch::Tensor& a, const torch::Tensor& b) {
    check_same_shape(a, b, "ssim");
    TORCH_CHECK(a.dim() == 3, "ssim expects [C,H,W] frames, got ", a.sizes());
    if (a.size(1) < kSsimWindow || a.size(2) < kSsimWindow) {
        throw std::invalid_argument("ssim needs frames of at least 11x11 pixels");
    }
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto w = gaussian_window();
    // channels become the batch so one kernel serves all of them
    const auto x = a.to(torch::kFloat64).unsqueeze(1);
    const auto y = b.to(torch::kFloat64).unsqueeze(1);
    const auto mu_x = torch::conv2d(x, w);
    const auto mu_y = torch::conv2d(y, w);
    const auto sxx = torch::conv2d(x * x, w) - mu_x * mu_x;
    const auto syy = torch::conv2d(y * y, w) - mu_y * mu_y;
    const auto sxy = torch::conv2d(x * y, w) - mu_x * mu_y;
    const auto map = ((2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)) /
                     ((mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2));
    return map.mean().item<double>();
}

double iou(const torch::Tensor& pred, const torch::Tensor& gt) {
    check_same_shape(pred, gt, "iou");
    const auto binary = [](const torch::Tensor& t) { return t.eq(0).logical_or(t.eq(1)).all().item<bool>(); };
    if (!binary(pred) || !binary(gt)) {
        throw std::invalid_argument("iou expects binary masks");
    }
    const auto p = pred.to(torch::kBool);
    const auto g = gt.to(torch::kBool);
    const auto inter = p.logical_and(g).sum().item<std::int64_t>();
    const auto uni = p.logical_or(g).sum().item<std::int64_t>();
    if (uni == 0) {
        return 1.0;
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double bce_mask(const torch::Tensor& pred_soft, const torch::Tensor& gt) {
    return train::loss_mask(pred_soft, gt).item<double>();
}

nlohmann::json ClipMetrics::to_json() const {
    return {{"clip_id", clip_id}, {"frames", frames}, {"psnr", psnr}, {"ssim", ssim},
            {"iou", iou},         {"bce", bce},       {"lpips", nullptr}, {"ewarp", nullptr}};
}

ClipMetrics aggregate(const std::vector<ClipMetrics>& clips) {
    ClipMetrics out;
    out.clip_id = "corpus";
    for (const auto& c : clips) {
        const auto w = static_cast<double>(c.frames);
        out.frames += c.frames;
        out.psnr += w * c.psnr;
        out.ssim += w * c.ssim;
        out.iou += w * c.iou;
        out.bce += w * c.bce;
    }
    if (out.frames > 0) {
        const auto n = static_cast<double>(out.frames);
        out.psnr /= n;
        out.ssim /= n;
        out.iou /= n;
        out.bce /= n;
    }
    return out;
}

std::string EvalReport::to_jsonl() const {
    std::string out;
    for (const auto& c : clips) {
        out += c.to_json().dump() + "\n";
    }
    out += corpus.to_json().dump() + "\n";
    return out;
}

std::string EvalReport::to_table() const {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %7s %9s %8s %8s %8s\n", "clip", "frames", "PSNR", "SSIM", "BCE",
                  "IOU");
    out += line;
    auto row = [&](const ClipMetrics& c) {
        std::snprintf(line, sizeof(line), "%-24s %7lld %9.3f %8.4f %8.4f %8.4f\n", c.clip_id.c_str(),
                      static_cast<long long>(c.frames), c.psnr, c.ssim, c.bce, c.iou);
        out += line;
    };
    for (const auto& c : clips) {
        row(c);
    }
    row(corpus);
    return out;
}

ClipMetrics evaluate_clip(const std::string& clip_id, const torch::Tensor& frames, const torch::Tensor& gt_frames,
                          const torch::Tensor& masks, const torch::Tensor& soft_masks,
                          const torch::Tensor& gt_masks) {
    check_same_shape(frames, gt_frames, "evaluate_clip frames");
    check_same_shape(masks, gt_masks, "evaluate_clip masks");
    check_same_shape(soft_masks, gt_masks, "evaluate_clip soft masks");
    ClipMetrics m;
    m.clip_id = clip_id;
    m.frames = frames.size(0);
    for (std::int64_t t = 0; t < m.frames; ++t) {
        m.psnr += psnr(frames[t], gt_frames[t]);
        m.ssim += ssim(frames[t], gt_frames[t]);
        m.iou += iou(masks[t], gt_masks[t]);
        m.bce += bce_mask(soft_masks[t], gt_masks[t]);
    }
    const auto n = static_cast<double>(m.frames);
    m.psnr /= n;
    m.ssim /= n;
    m.iou /= n;
    m.bce /= n;
    return m;
}

EvalReport evaluate_corpus(const std::filesystem::path& results, const std::filesystem::path& gt) {
    const auto result_records = infer::read_result_manifest(results);
    const auto gt_index = data::read_manifest(gt);
    std::map<std::string, data::ClipRecord> by_id;
    for (const auto& c : gt_index.clips) {
        by_id.emplace(c.clip_id, c);
    }
    std::vector<std::string> problems;
    for (const auto& r : result_records) {
        const auto it = by_id.find(r.clip_id);
        if (it == by_id.end()) {
            problems.push_back(r.clip_id + ": no ground-truth clip");
            continue;
        }
        const auto& g = it->second;
        if (g.num_frames != r.num_frames) {
            problems.push_back(r.clip_id + ": " + std::to_string(r.num_frames) + " result frames vs " +
                               std::to_string(g.num_frames) + " ground-truth frames");
        }
        if (g.height != r.height || g.width != r.width) {
            problems.push_back(r.clip_id + ": frame size differs from ground truth");
        }
        for (const char* folder : {"completed", "masks", "soft_masks"}) {
            for (std::int64_t t = 0; t < r.num_frames; ++t) {
                const auto file = results / r.dir / folder / frame_file_name(t);
                if (!std::filesystem::exists(file)) {
                    problems.push_back(r.clip_id + ": missing " + file.string());
                }
            }
        }
    }
    if (!problems.empty()) {
        std::string what = "result and ground-truth manifests disagree";
        for (const auto& p : problems) {
            what += "\n  " + p;
        }
        throw IoError(results, what);
    }
    EvalReport report;
    for (const auto& r : result_records) {
        const auto& g = by_id.at(r.clip_id);
        const auto result = infer::read_result(results / r.dir);
        const auto clip = data::load_clip(gt, g);
        report.clips.push_back(
            evaluate_clip(r.clip_id, result.completed, clip.gt_frames, result.masks, result.soft_masks, clip.masks));
    }
    report.corpus = aggregate(report.clips);
    return report;
}

}  // namespace svi::eval
