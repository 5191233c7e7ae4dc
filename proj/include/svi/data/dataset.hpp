#pragma once

#include "svi/data/synth.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace svi::data {

inline constexpr const char* kManifestName = "manifest.jsonl";

/// One manifest line. `dir` is relative to the dataset root and holds
/// frames/, gt/, masks/ and alphas/ subdirectories of NNNNN.png files.
struct ClipRecord {
    std::string clip_id;
    std::string split;
    std::string dir;
    std::int64_t num_frames = 0;
    std::int64_t height = 0;
    std::int64_t width = 0;
    ClipProvenance provenance;

    bool operator==(const ClipRecord&) const = default;
};

struct DatasetIndex {
    std::vector<ClipRecord> clips;

    std::vector<ClipRecord> split(const std::string& name) const;
    bool operator==(const DatasetIndex&) const = default;
};

void write_manifest(const std::filesystem::path& root, const DatasetIndex& index);

/// Parses `<root>/manifest.jsonl`. With `verify_files`, every referenced
/// per-frame PNG must exist; the first missing one is reported by path.
DatasetIndex read_manifest(const std::filesystem::path& root, bool verify_files = true);

/// Writes the four image folders of `clip` under `<root>/<split>/<clip_id>`.
ClipRecord write_clip(const std::filesystem::path& root, const std::string& split,
                      const CorruptedClip& clip);

CorruptedClip load_clip(const std::filesystem::path& root, const ClipRecord& record);

}  // namespace svi::data
