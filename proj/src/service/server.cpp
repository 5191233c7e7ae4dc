#include "svi/service/server.hpp"

#include "svi/error.hpp"
#include "svi/image.hpp"
#include "svi/infer/plan.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdio>

namespace svi::service {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message, const json& extra = json::object()) {
    json body = extra;
    body["error"] = message;
    reply(res, status, body);
}

void send_png(const httplib::Request& req, httplib::Response& res, const torch::Tensor& image) {
    const auto bytes = encode_png(image);
    std::string body(bytes.begin(), bytes.end());
    char tag[24];
    std::snprintf(tag, sizeof(tag), "\"%016llx\"", static_cast<unsigned long long>(fnv1a(body)));
    res.set_header("ETag", tag);
    res.set_header("Cache-Control", "no-cache");
    if (req.get_header_value("If-None-Match") == tag) {
        res.status = 304;
        return;
    }
    res.status = 200;
    res.set_content(std::move(body), "image/png");
}

bool is_binary_mask(const torch::Tensor& mask) {
    const auto levels = mask.mul(255.0).round();
    return levels.eq(0).logical_or(levels.eq(255)).all().item<bool>();
}

}  // namespace

InpaintService::InpaintService(std::filesystem::path workdir, std::shared_ptr<infer::InpaintingBackend> backend,
                               infer::PropagateOptions options, std::filesystem::path static_dir)
    : store_(std::move(workdir)),
      backend_(std::move(backend)),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
    install_routes();
    if (!static_dir.empty()) {
        if (!server_->set_mount_point("/", static_dir.string())) {
            throw IoError(static_dir, "static directory not found");
        }
    }
    worker_ = std::thread([this] { worker_loop(); });
}

InpaintService::~InpaintService() { stop(); }

int InpaintService::start(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    http_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void InpaintService::listen(const std::string& host, int port) {
    if (!server_->listen(host, port)) {
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
    }
}

void InpaintService::stop() {
    if (server_) {
        server_->stop();
    }
    if (http_thread_.joinable()) {
        http_thread_.join();
    }
    {
        std::lock_guard lock(queue_mutex_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    if (worker_.joinable()) {
        worker_.join();
    }
}

void InpaintService::install_routes() {
    auto& srv = *server_;

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            fail(res, 500, e.what());
        } catch (...) {
            fail(res, 500, "unknown error");
        }
    });

    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        const auto files = req.get_file_values("frames");
        if (files.empty()) {
            fail(res, 400, "no frames uploaded; send multipart field \"frames\"");
            return;
        }
        std::vector<torch::Tensor> frames;
        for (std::size_t i = 0; i < files.size(); ++i) {
            const auto& c = files[i].content;
            try {
                frames.push_back(decode_png({reinterpret_cast<const std::uint8_t*>(c.data()), c.size()}, 3));
            } catch (const std::exception& e) {
                fail(res, 400, "frame " + std::to_string(i) + ": " + e.what(), {{"index", i}});
                return;
            }
        }
        try {
            const auto s = store_.create(frames);
            std::lock_guard lock(s->mutex);
            reply(res, 201, s->status_json());
        } catch (const UploadError& e) {
            fail(res, 400, e.what(), {{"index", e.index >= 0 ? json(e.index) : json(nullptr)}});
        }
    });

    srv.Put(R"(/sessions/([A-Za-z0-9]+)/annotations/(\d+))", [this](const httplib::Request& req,
                                                                     httplib::Response& res) {
        const auto s = store_.find(req.matches[1]);
        if (!s) {
            fail(res, 404, "unknown session");
            return;
        }
        std::lock_guard lock(s->mutex);
        if (s->status == Status::Running) {
            fail(res, 409, "a propagation is running for this session");
            return;
        }
        const auto index = std::stoll(req.matches[2]);
        if (index >= s->length()) {
            fail(res, 400, "frame index out of range", {{"frames", s->length()}});
            return;
        }
        torch::Tensor mask;
        try {
            mask = decode_png({reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()}, 1);
        } catch (const std::exception& e) {
            fail(res, 400, e.what());
            return;
        }
        if (mask.size(1) != s->height() || mask.size(2) != s->width()) {
            fail(res, 400, "mask size differs from the clip frames");
            return;
        }
        if (!is_binary_mask(mask)) {
            fail(res, 400, "mask must only contain the values 0 and 255");
            return;
        }
        s->annotations[index] = mask.gt(0.5).to(torch::kFloat32);
        store_.save_annotation(*s, index);
        store_.save_meta(*s);
        reply(res, 200, s->status_json());
    });

    srv.Get(R"(/sessions/([A-Za-z0-9]+)/annotations/(\d+))", [this](const httplib::Request& req,
                                                                     httplib::Response& res) {
        const auto s = store_.find(req.matches[1]);
        if (!s) {
            fail(res, 404, "unknown session");
            return;
        }
        std::lock_guard lock(s->mutex);
        const auto it = s->annotations.find(std::stoll(req.matches[2]));
        if (it == s->annotations.end()) {
            fail(res, 404, "no annotation at this frame");
            return;
        }
        res.set_header("X-Provenance", "annotated");
        send_png(req, res, it->second);
    });

    srv.Post(R"(/sessions/([A-Za-z0-9]+)/inpaint)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto s = store_.find(req.matches[1]);
        if (!s) {
            fail(res, 404, "unknown session");
            return;
        }
        {
            std::lock_guard lock(s->mutex);
            if (s->status == Status::Running) {
                fail(res, 409, "a propagation is already running");
                return;
            }
            if (s->status == Status::Error) {
                fail(res, 409, "session is in the error state", {{"detail", s->error}});
                return;
            }
            if (s->annotations.empty()) {
                fail(res, 422, "annotate at least one frame first");
                return;
            }
            s->status = Status::Running;
            s->done_frames = 0;
            s->error.clear();
            store_.save_meta(*s);
            reply(res, 202, s->status_json());
        }
        {
            std::lock_guard lock(queue_mutex_);
            queue_.push_back(s);
        }
        queue_cv_.notify_one();
    });

    srv.Get(R"(/sessions/([A-Za-z0-9]+)/status)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto s = store_.find(req.matches[1]);
        if (!s) {
            fail(res, 404, "unknown session");
            return;
        }
        std::lock_guard lock(s->mutex);
        reply(res, 200, s->status_json());
    });

    srv.Get(R"(/sessions/([A-Za-z0-9]+)/frames/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto s = store_.find(req.matches[1]);
        if (!s) {
            fail(res, 404, "unknown session");
            return;
        }
        const auto kind = req.has_param("kind") ? req.get_param_value("kind") : std::string("completed");
        if (kind != "completed" && kind != "mask" && kind != "soft_mask" && kind != "input") {
            fail(res, 400, "kind must be completed, mask, soft_mask or input");
            return;
        }
        std::lock_guard lock(s->mutex);
        const auto t = std::stoll(req.matches[2]);
        if (t >= s->length()) {
            fail(res, 404, "no such frame");
            return;
        }
        if (kind == "input") {
            send_png(req, res, s->frames[t]);
            return;
        }
        if (s->status != Status::Done || !s->result) {
            fail(res, 409, "results are not ready", {{"status", to_string(s->status)}});
            return;
        }
        const auto& r = *s->result;
        res.set_header("X-Provenance", infer::to_string(r.provenance[static_cast<std::size_t>(t)]));
        if (kind == "completed") {
            send_png(req, res, r.completed[t]);
        } else if (kind == "mask") {
            send_png(req, res, r.masks[t]);
        } else {
            send_png(req, res, r.soft_masks[t]);
        }
    });
}

void InpaintService::worker_loop() {
    while (true) {
        std::shared_ptr<Session> s;
        {
            std::unique_lock lock(queue_mutex_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_) {
                return;
            }
            s = queue_.front();
            queue_.pop_front();
        }
        run_job(s);
    }
}

void InpaintService::run_job(const std::shared_ptr<Session>& s) {
    torch::Tensor frames;
    infer::AnnotationSet annotations;
    std::optional<infer::InpaintResult> previous;
    {
        std::lock_guard lock(s->mutex);
        frames = s->frames;
        annotations.length = s->length();
        for (const auto& [index, mask] : s->annotations) {
            annotations.masks[index] = mask.clone();
        }
        previous = s->result;
    }
    try {
        // a previous result whose annotations are all still present is refined
        // one new or changed annotation at a time
        std::vector<std::int64_t> changed;
        bool reusable = previous.has_value();
        if (reusable) {
            for (const auto& [index, mask] : previous->annotations.masks) {
                if (!annotations.masks.count(index)) {
                    reusable = false;
                }
            }
            for (const auto& [index, mask] : annotations.masks) {
                const auto it = previous->annotations.masks.find(index);
                if (it == previous->annotations.masks.end() || !torch::equal(it->second.gt(0.5), mask.gt(0.5))) {
                    changed.push_back(index);
                }
            }
        }
        infer::InpaintResult result;
        auto options = options_;
        std::int64_t offset = 0;
        std::int64_t total = 0;
        options.progress = [&](std::int64_t done, std::int64_t) {
            std::lock_guard lock(s->mutex);
            s->done_frames = offset + done;
            s->total_frames = total;
        };
        if (reusable && !changed.empty()) {
            auto staged = previous->annotations;
            for (const auto index : changed) {
                staged.masks[index] = annotations.masks.at(index);
                total += static_cast<std::int64_t>(infer::build_plan(staged).segment(index).size());
            }
            result = *previous;
            for (const auto index : changed) {
                result = infer::refine(result, frames, index, annotations.masks.at(index), *backend_, options);
                offset += static_cast<std::int64_t>(infer::build_plan(result.annotations).segment(index).size());
            }
        } else {
            total = frames.size(0);
            result = infer::propagate(frames, annotations, *backend_, options);
        }
        std::lock_guard lock(s->mutex);
        s->result = std::move(result);
        s->status = Status::Done;
        s->done_frames = s->total_frames = total;
        store_.save_result(*s);
        store_.save_meta(*s);
    } catch (const std::exception& e) {
        std::lock_guard lock(s->mutex);
        s->status = Status::Error;
        s->error = e.what();
        store_.save_meta(*s);
    }
}

}  // namespace svi::service
