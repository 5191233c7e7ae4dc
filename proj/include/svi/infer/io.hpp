#pragma once

// On-disk layout of inference outputs. A result root holds manifest.jsonl
// (one line per clip: clip_id, dir, num_frames, height, width) and one
// directory per clip with completed/, masks/ and soft_masks/ image folders
// plus provenance.json.

#include "svi/infer/propagate.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace svi::infer {

struct ResultRecord {
    std::string clip_id;
    std::string dir;  ///< relative to the result root
    std::int64_t num_frames = 0;
    std::int64_t height = 0;
    std::int64_t width = 0;

    bool operator==(const ResultRecord&) const = default;
};

/// Frames of a clip directory (its frames/ folder), [T,3,H,W].
torch::Tensor load_clip_frames(const std::filesystem::path& clip_dir);

/// Every NNNNN.png in `dir` becomes the annotation of frame NNNNN.
AnnotationSet load_annotations(const std::filesystem::path& dir, std::int64_t length);

void write_result(const std::filesystem::path& clip_dir, const std::string& clip_id,
                  const InpaintResult& result);
InpaintResult read_result(const std::filesystem::path& clip_dir);

void write_result_manifest(const std::filesystem::path& root, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_result_manifest(const std::filesystem::path& root);

}  // namespace svi::infer
