#pragma once

#include "svi/infer/propagate.hpp"

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace svi::service {

inline constexpr std::int64_t kMaxFrames = 256;
inline constexpr std::int64_t kMaxSide = 1024;

enum class Status { Idle, Running, Done, Error };
std::string to_string(Status s);
Status status_from_string(const std::string& s);

/// One uploaded clip with its annotations and latest result. Every field is
/// guarded by `mutex`; the store hands out shared pointers.
struct Session {
    std::string id;
    std::filesystem::path dir;
    torch::Tensor frames;  ///< [T,3,H,W]
    std::map<std::int64_t, torch::Tensor> annotations;
    std::optional<infer::InpaintResult> result;
    Status status = Status::Idle;
    std::int64_t done_frames = 0;
    std::int64_t total_frames = 0;
    std::string error;
    mutable std::mutex mutex;

    std::int64_t length() const { return frames.size(0); }
    std::int64_t height() const { return frames.size(2); }
    std::int64_t width() const { return frames.size(3); }

    nlohmann::json status_json() const;  ///< caller holds `mutex`
};

/// Frame-upload validation failure; `index` is the offending frame or -1.
struct UploadError : std::invalid_argument {
    UploadError(const std::string& what, std::int64_t index) : std::invalid_argument(what), index(index) {}
    std::int64_t index;
};

/// Sessions persisted under a working directory:
///   <root>/<id>/session.json, input/NNNNN.png, annotations/NNNNN.png, result/...
class SessionStore {
public:
    /// Reloads every session found under `root`. Runs interrupted by a
    /// shutdown come back in the error state.
    explicit SessionStore(std::filesystem::path root);

    /// Validates the frames (1..256, uniform size, each side <= 1024) and persists them.
    std::shared_ptr<Session> create(const std::vector<torch::Tensor>& frames);
    std::shared_ptr<Session> find(const std::string& id) const;
    std::vector<std::string> ids() const;

    /// Writers below expect the caller to hold the session mutex.
    void save_meta(const Session& s) const;
    void save_annotation(const Session& s, std::int64_t index) const;
    void save_result(const Session& s) const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::shared_ptr<Session> load(const std::filesystem::path& dir) const;

    std::filesystem::path root_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace svi::service
