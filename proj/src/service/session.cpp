#include "svi/service/session.hpp"

#include "svi/error.hpp"
#include "svi/image.hpp"
#include "svi/infer/io.hpp"

#include <fstream>
#include <random>

namespace svi::service {

using nlohmann::json;

std::string to_string(Status s) {
    switch (s) {
        case Status::Idle: return "idle";
        case Status::Running: return "running";
        case Status::Done: return "done";
        case Status::Error: return "error";
    }
    return "error";
}

Status status_from_string(const std::string& s) {
    if (s == "idle") return Status::Idle;
    if (s == "running") return Status::Running;
    if (s == "done") return Status::Done;
    return Status::Error;
}

json Session::status_json() const {
    json annotated = json::array();
    for (const auto& [index, _] : annotations) {
        annotated.push_back(index);
    }
    json provenance = nullptr;
    if (result && status == Status::Done) {
        provenance = json::array();
        for (const auto p : result->provenance) {
            provenance.push_back(infer::to_string(p));
        }
    }
    return {{"session_id", id},
            {"status", to_string(status)},
            {"frames", length()},
            {"height", height()},
            {"width", width()},
            {"annotations", annotated},
            {"progress", {{"done", done_frames}, {"total", total_frames}}},
            {"provenance", provenance},
            {"error", error.empty() ? json(nullptr) : json(error)}};
}

namespace {

std::string new_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
    return buf;
}

}  // namespace

SessionStore::SessionStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "session.json")) {
            auto s = load(entry.path());
            sessions_.emplace(s->id, std::move(s));
        }
    }
}

std::shared_ptr<Session> SessionStore::create(const std::vector<torch::Tensor>& frames) {
    if (frames.empty()) {
        throw UploadError("no frames uploaded", -1);
    }
    if (static_cast<std::int64_t>(frames.size()) > kMaxFrames) {
        throw UploadError("at most 256 frames per session", kMaxFrames);
    }
    const auto h = frames.front().size(1);
    const auto w = frames.front().size(2);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        const auto index = static_cast<std::int64_t>(i);
        if (f.dim() != 3 || f.size(0) != 3) {
            throw UploadError("frame " + std::to_string(i) + " is not an RGB image", index);
        }
        if (f.size(1) > kMaxSide || f.size(2) > kMaxSide) {
            throw UploadError("frame " + std::to_string(i) + " exceeds 1024x1024", index);
        }
        if (f.size(1) != h || f.size(2) != w) {
            throw UploadError("frame " + std::to_string(i) + " is " + std::to_string(f.size(2)) + "x" +
                                  std::to_string(f.size(1)) + " but frame 0 is " + std::to_string(w) + "x" +
                                  std::to_string(h),
                              index);
        }
    }
    auto s = std::make_shared<Session>();
    s->id = new_id();
    s->dir = root_ / s->id;
    s->frames = torch::stack(frames);
    s->total_frames = s->length();
    write_stack(s->dir / "input", s->frames);
    save_meta(*s);
    std::lock_guard lock(mutex_);
    sessions_.emplace(s->id, s);
    return s;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionStore::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) {
        out.push_back(id);
    }
    return out;
}

void SessionStore::save_meta(const Session& s) const {
    json annotated = json::array();
    for (const auto& [index, _] : s.annotations) {
        annotated.push_back(index);
    }
    const json meta{{"id", s.id},
                    {"frames", s.length()},
                    {"status", to_string(s.status)},
                    {"error", s.error},
                    {"annotations", annotated}};
    const auto path = s.dir / "session.json";
    const auto tmp = s.dir / "session.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(tmp, "cannot write session record");
        }
        out << meta.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

void SessionStore::save_annotation(const Session& s, std::int64_t index) const {
    write_png(s.dir / "annotations" / frame_file_name(index), s.annotations.at(index));
}

void SessionStore::save_result(const Session& s) const {
    infer::write_result(s.dir / "result", s.id, *s.result);
}

std::shared_ptr<Session> SessionStore::load(const std::filesystem::path& dir) const {
    std::ifstream in(dir / "session.json", std::ios::binary);
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(dir / "session.json", std::string("malformed session record (") + e.what() + ")");
    }
    auto s = std::make_shared<Session>();
    s->id = meta.at("id").get<std::string>();
    s->dir = dir;
    s->frames = read_stack(dir / "input", meta.at("frames").get<std::int64_t>(), 3);
    s->total_frames = s->length();
    for (const auto& index : meta.at("annotations")) {
        const auto t = index.get<std::int64_t>();
        s->annotations[t] = read_mask_png(dir / "annotations" / frame_file_name(t)).gt(0.5).to(torch::kFloat32);
    }
    s->status = status_from_string(meta.at("status").get<std::string>());
    s->error = meta.value("error", std::string{});
    if (s->status == Status::Running) {
        s->status = Status::Error;
        s->error = "interrupted by a service restart";
    }
    if (s->status == Status::Done) {
        s->result = infer::read_result(dir / "result");
        s->done_frames = s->total_frames;
    }
    return s;
}

}  // namespace svi::service
