#include "svi/infer/io.hpp"

#include "svi/data/dataset.hpp"
#include "svi/error.hpp"
#include "svi/image.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <regex>

namespace svi::infer {

using nlohmann::json;

torch::Tensor load_clip_frames(const std::filesystem::path& clip_dir) {
    const auto dir = clip_dir / "frames";
    const auto count = count_frames(dir);
    if (count == 0) {
        throw IoError(dir, "clip has no frames");
    }
    return read_stack(dir, count, 3);
}

AnnotationSet load_annotations(const std::filesystem::path& dir, std::int64_t length) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError(dir, "missing annotation directory");
    }
    static const std::regex name(R"((\d{5})\.png)");
    AnnotationSet set;
    set.length = length;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::smatch m;
        const auto file = entry.path().filename().string();
        if (!std::regex_match(file, m, name)) {
            continue;
        }
        const auto index = std::stoll(m[1].str());
        if (index >= length) {
            throw IoError(entry.path(), "annotation index beyond clip length " + std::to_string(length));
        }
        set.masks[index] = read_mask_png(entry.path()).gt(0.5).to(torch::kFloat32);
    }
    if (set.masks.empty()) {
        throw IoError(dir, "no annotation files");
    }
    return set;
}

void write_result(const std::filesystem::path& clip_dir, const std::string& clip_id,
                  const InpaintResult& result) {
    write_stack(clip_dir / "completed", result.completed);
    write_stack(clip_dir / "masks", result.masks);
    write_stack(clip_dir / "soft_masks", result.soft_masks);
    json frames = json::array();
    for (const auto p : result.provenance) {
        frames.push_back(to_string(p));
    }
    const json record{{"clip_id", clip_id},
                      {"num_frames", result.completed.size(0)},
                      {"annotated", result.annotations.indices()},
                      {"provenance", frames}};
    const auto path = clip_dir / "provenance.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path, "cannot write provenance record");
    }
    out << record.dump(2) << '\n';
}

InpaintResult read_result(const std::filesystem::path& clip_dir) {
    const auto path = clip_dir / "provenance.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path, "missing provenance record");
    }
    json record;
    try {
        record = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path, std::string("malformed provenance record (") + e.what() + ")");
    }
    const auto count = record.at("num_frames").get<std::int64_t>();
    InpaintResult result;
    result.completed = read_stack(clip_dir / "completed", count, 3);
    result.masks = read_stack(clip_dir / "masks", count, 1).gt(0.5).to(torch::kFloat32);
    result.soft_masks = read_stack(clip_dir / "soft_masks", count, 1);
    for (const auto& p : record.at("provenance")) {
        result.provenance.push_back(p.get<std::string>() == "annotated" ? Provenance::Annotated
                                                                         : Provenance::Predicted);
    }
    result.annotations.length = count;
    for (const auto& index : record.at("annotated")) {
        const auto t = index.get<std::int64_t>();
        result.annotations.masks[t] = result.masks[t].clone();
    }
    return result;
}

void write_result_manifest(const std::filesystem::path& root, const std::vector<ResultRecord>& records) {
    std::filesystem::create_directories(root);
    const auto path = root / data::kManifestName;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path, "cannot write manifest");
    }
    for (const auto& r : records) {
        out << json{{"clip_id", r.clip_id},
                    {"dir", r.dir},
                    {"num_frames", r.num_frames},
                    {"height", r.height},
                    {"width", r.width}}
                   .dump()
            << '\n';
    }
}

std::vector<ResultRecord> read_result_manifest(const std::filesystem::path& root) {
    const auto path = root / data::kManifestName;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path, "missing manifest");
    }
    std::vector<ResultRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            records.push_back({j.at("clip_id").get<std::string>(), j.at("dir").get<std::string>(),
                               j.at("num_frames").get<std::int64_t>(), j.at("height").get<std::int64_t>(),
                               j.at("width").get<std::int64_t>()});
        } catch (const json::exception& e) {
            throw IoError(path, "malformed record on line " + std::to_string(line_no) + " (" + e.what() + ")");
        }
    }
    return records;
}

}  // namespace svi::infer
