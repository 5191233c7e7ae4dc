#pragma once

#include "svi/infer/propagate.hpp"
#include "svi/service/session.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <thread>

namespace httplib {
class Server;
}

namespace svi::service {

/// HTTP front end over a SessionStore. Propagations run on one worker thread
/// that serves sessions in FIFO order; request handlers never block on it.
///
///   POST /sessions                          multipart "frames" -> 201 {session_id,...}
///   PUT  /sessions/{id}/annotations/{t}     PNG mask body       -> 200
///   GET  /sessions/{id}/annotations/{t}     stored mask PNG
///   POST /sessions/{id}/inpaint             -> 202
///   GET  /sessions/{id}/status              -> JSON
///   GET  /sessions/{id}/frames/{t}?kind=completed|mask|soft_mask|input
class InpaintService {
public:
    InpaintService(std::filesystem::path workdir, std::shared_ptr<infer::InpaintingBackend> backend,
                   infer::PropagateOptions options = {}, std::filesystem::path static_dir = {});
    ~InpaintService();

    InpaintService(const InpaintService&) = delete;
    InpaintService& operator=(const InpaintService&) = delete;

    /// Binds and serves in a background thread; returns the bound port
    /// (pass 0 for an ephemeral port).
    int start(const std::string& host, int port);
    /// Blocks serving on the calling thread.
    void listen(const std::string& host, int port);
    void stop();

    SessionStore& store() { return store_; }

private:
    void install_routes();
    void worker_loop();
    void run_job(const std::shared_ptr<Session>& session);

    SessionStore store_;
    std::shared_ptr<infer::InpaintingBackend> backend_;
    infer::PropagateOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread http_thread_;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<std::shared_ptr<Session>> queue_;
    bool stopping_ = false;
    std::thread worker_;
};

/// 64-bit FNV-1a, used for ETags.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace svi::service
