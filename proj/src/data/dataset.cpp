#include "svi/data/dataset.hpp"

#include "svi/error.hpp"
#include "svi/image.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace svi::data {
namespace {

using nlohmann::json;

constexpr std::array<const char*, 4> kFolders = {"frames", "gt", "masks", "alphas"};

json to_json(const ClipRecord& r) {
    return json{{"clip_id", r.clip_id},
                {"split", r.split},
                {"dir", r.dir},
                {"num_frames", r.num_frames},
                {"height", r.height},
                {"width", r.width},
                {"noise_id", r.provenance.noise_id},
                {"seeds",
                 {{"base", r.provenance.seed},
                  {"stroke", r.provenance.stroke_seed},
                  {"jitter", r.provenance.jitter_seed},
                  {"noise", r.provenance.noise_seed}}}};
}

ClipRecord from_json(const json& j) {
    ClipRecord r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.dir = j.at("dir").get<std::string>();
    r.num_frames = j.at("num_frames").get<std::int64_t>();
    r.height = j.at("height").get<std::int64_t>();
    r.width = j.at("width").get<std::int64_t>();
    r.provenance.clip_id = r.clip_id;
    r.provenance.noise_id = j.value("noise_id", std::string{});
    if (j.contains("seeds")) {
        const auto& s = j.at("seeds");
        r.provenance.seed = s.value("base", std::uint64_t{0});
        r.provenance.stroke_seed = s.value("stroke", std::uint64_t{0});
        r.provenance.jitter_seed = s.value("jitter", std::uint64_t{0});
        r.provenance.noise_seed = s.value("noise", std::uint64_t{0});
    }
    return r;
}

}  // namespace

std::vector<ClipRecord> DatasetIndex::split(const std::string& name) const {
    std::vector<ClipRecord> out;
    for (const auto& c : clips) {
        if (c.split == name) {
            out.push_back(c);
        }
    }
    return out;
}

void write_manifest(const std::filesystem::path& root, const DatasetIndex& index) {
    std::filesystem::create_directories(root);
    const auto path = root / kManifestName;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path, "cannot write manifest");
    }
    for (const auto& clip : index.clips) {
        out << to_json(clip).dump() << '\n';
    }
    if (!out) {
        throw IoError(path, "failed while writing manifest");
    }
}

DatasetIndex read_manifest(const std::filesystem::path& root, bool verify_files) {
    const auto path = root / kManifestName;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path, "missing manifest");
    }
    DatasetIndex index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            index.clips.push_back(from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw IoError(path, "malformed record on line " + std::to_string(line_no) + " (" + e.what() + ")");
        }
    }
    if (verify_files) {
        for (const auto& clip : index.clips) {
            for (const char* folder : kFolders) {
                for (std::int64_t t = 0; t < clip.num_frames; ++t) {
                    const auto file = root / clip.dir / folder / frame_file_name(t);
                    if (!std::filesystem::exists(file)) {
                        throw IoError(file, "manifest references a missing file");
                    }
                }
            }
        }
    }
    return index;
}

ClipRecord write_clip(const std::filesystem::path& root, const std::string& split,
                      const CorruptedClip& clip) {
    ClipRecord record;
    record.clip_id = clip.provenance.clip_id;
    record.split = split;
    record.dir = split + "/" + record.clip_id;
    record.num_frames = clip.length();
    record.height = clip.height();
    record.width = clip.width();
    record.provenance = clip.provenance;
    const auto base = root / record.dir;
    for (std::int64_t t = 0; t < clip.length(); ++t) {
        const auto name = frame_file_name(t);
        write_png(base / "frames" / name, clip.frames[t]);
        write_png(base / "gt" / name, clip.gt_frames[t]);
        write_png(base / "masks" / name, clip.masks[t]);
        write_png(base / "alphas" / name, clip.alphas[t]);
    }
    return record;
}

CorruptedClip load_clip(const std::filesystem::path& root, const ClipRecord& record) {
    const auto base = root / record.dir;
    CorruptedClip clip;
    clip.frames = read_stack(base / "frames", record.num_frames, 3);
    clip.gt_frames = read_stack(base / "gt", record.num_frames, 3);
    clip.masks = read_stack(base / "masks", record.num_frames, 1).gt(0.5).to(torch::kFloat32);
    clip.alphas = read_stack(base / "alphas", record.num_frames, 1);
    clip.provenance = record.provenance;
    return clip;
}

}  // namespace svi::data
