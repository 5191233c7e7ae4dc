#include "svi/image.hpp"
#include "svi/service/server.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <thread>

using namespace svi;
using nlohmann::json;

namespace {

/// Network backend whose completions wait until the gate opens, so tests can
/// observe the running state.
class GatedBackend final : public infer::InpaintingBackend {
public:
    explicit GatedBackend(model::InpaintingModel m) : inner_(std::move(m)) {}

    void close() {
        std::lock_guard lock(mutex_);
        open_ = false;
    }
    void open() {
        {
            std::lock_guard lock(mutex_);
            open_ = true;
        }
        cv_.notify_all();
    }

    infer::FrameCompletion complete(std::int64_t index, const std::vector<torch::Tensor>& refs,
                                    const torch::Tensor& target, const torch::Tensor& mask) override {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return open_; });
        lock.unlock();
        return inner_.complete(index, refs, target, mask);
    }
    torch::Tensor predict_mask(std::int64_t q, const torch::Tensor& query, std::int64_t c,
                               const infer::FrameCompletion& done) override {
        return inner_.predict_mask(q, query, c, done);
    }
    std::int64_t reference_radius() const override { return inner_.reference_radius(); }

private:
    infer::NetworkBackend inner_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool open_ = true;
};

std::string png(const torch::Tensor& image) {
    const auto bytes = encode_png(image);
    return {bytes.begin(), bytes.end()};
}

httplib::MultipartFormDataItems frame_parts(const torch::Tensor& frames) {
    httplib::MultipartFormDataItems items;
    for (std::int64_t t = 0; t < frames.size(0); ++t) {
        items.push_back({"frames", png(frames[t]), frame_file_name(t), "image/png"});
    }
    return items;
}

torch::Tensor decode_mask(const std::string& body) {
    return decode_png(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()), 1);
}

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override {
        torch::manual_seed(0);
        backend_ = std::make_shared<GatedBackend>(model::InpaintingModel(test::tiny_config()));
        start();
        clip_ = test::hard_clip("svc", 6, 32, 11);
    }
    void TearDown() override {
        backend_->open();
        service_->stop();
    }
    void start() {
        service_ = std::make_unique<service::InpaintService>(dir_.path(), backend_);
        port_ = service_->start("127.0.0.1", 0);
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(60, 0);
    }
    void restart() {
        service_->stop();
        start();
    }
    std::string upload() {
        auto res = client_->Post("/sessions", frame_parts(clip_.frames));
        EXPECT_EQ(res->status, 201);
        return json::parse(res->body).at("session_id").get<std::string>();
    }
    int put_mask(const std::string& id, std::int64_t t, const torch::Tensor& mask) {
        return client_->Put("/sessions/" + id + "/annotations/" + std::to_string(t), png(mask), "image/png")->status;
    }
    json status(const std::string& id) { return json::parse(client_->Get("/sessions/" + id + "/status")->body); }
    json wait_done(const std::string& id) {
        for (int i = 0; i < 600; ++i) {
            auto s = status(id);
            if (s.at("status") != "running") {
                return s;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        ADD_FAILURE() << "propagation did not finish";
        return {};
    }
    httplib::Result frame(const std::string& id, std::int64_t t, const std::string& kind,
                          const httplib::Headers& headers = {}) {
        return client_->Get("/sessions/" + id + "/frames/" + std::to_string(t) + "?kind=" + kind, headers);
    }

    test::TempDir dir_{"svi-service"};
    std::shared_ptr<GatedBackend> backend_;
    std::unique_ptr<service::InpaintService> service_;
    std::unique_ptr<httplib::Client> client_;
    int port_ = 0;
    data::CorruptedClip clip_;
};

}  // namespace

TEST_F(ServiceTest, UploadValidation) {
    auto ok = client_->Post("/sessions", frame_parts(clip_.frames));
    ASSERT_EQ(ok->status, 201);
    const auto body = json::parse(ok->body);
    EXPECT_EQ(body.at("frames"), 6);
    EXPECT_EQ(body.at("status"), "idle");

    auto parts = frame_parts(clip_.frames.narrow(0, 0, 3));
    parts.insert(parts.begin() + 1, {"frames", png(torch::rand({3, 64, 64})), "x.png", "image/png"});
    auto mixed = client_->Post("/sessions", parts);
    EXPECT_EQ(mixed->status, 400);
    EXPECT_EQ(json::parse(mixed->body).at("index"), 1);

    EXPECT_EQ(client_->Post("/sessions", httplib::MultipartFormDataItems{})->status, 400);
    auto garbage = client_->Post("/sessions", httplib::MultipartFormDataItems{{"frames", "not a png", "a.png", "image/png"}});
    EXPECT_EQ(garbage->status, 400);
    EXPECT_EQ(json::parse(garbage->body).at("index"), 0);
}

TEST_F(ServiceTest, AnnotationContract) {
    const auto id = upload();
    EXPECT_EQ(put_mask(id, 0, clip_.masks[0]), 200);
    EXPECT_EQ(put_mask(id, 6, clip_.masks[0]), 400);
    EXPECT_EQ(put_mask(id, 1, torch::full({1, 32, 32}, 0.5)), 400);
    EXPECT_EQ(put_mask(id, 1, torch::zeros({1, 16, 16})), 400);
    EXPECT_EQ(client_->Put("/sessions/" + id + "/annotations/1", "junk", "image/png")->status, 400);
    EXPECT_EQ(put_mask("nosuch", 0, clip_.masks[0]), 404);
    auto back = client_->Get("/sessions/" + id + "/annotations/0");
    ASSERT_EQ(back->status, 200);
    EXPECT_TRUE(torch::equal(decode_mask(back->body), clip_.masks[0]));
    EXPECT_EQ(client_->Get("/sessions/" + id + "/annotations/3")->status, 404);
    EXPECT_EQ(status(id).at("annotations"), json::array({0}));
}

TEST_F(ServiceTest, RunLifecycleAndResults) {
    const auto id = upload();
    EXPECT_EQ(client_->Post("/sessions/" + id + "/inpaint")->status, 422);
    EXPECT_EQ(frame(id, 0, "completed")->status, 409);
    EXPECT_EQ(frame(id, 0, "input")->status, 200);
    ASSERT_EQ(put_mask(id, 0, clip_.masks[0]), 200);
    EXPECT_EQ(client_->Post("/sessions/" + id + "/inpaint")->status, 202);
    const auto done = wait_done(id);
    EXPECT_EQ(done.at("status"), "done");
    EXPECT_EQ(done.at("progress").at("done"), 6);
    EXPECT_EQ(done.at("provenance")[0], "annotated");
    EXPECT_EQ(done.at("provenance")[3], "predicted");

    auto completed = frame(id, 2, "completed");
    ASSERT_EQ(completed->status, 200);
    EXPECT_EQ(completed->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(completed->get_header_value("X-Provenance"), "predicted");

    auto mask = frame(id, 0, "mask");
    ASSERT_EQ(mask->status, 200);
    EXPECT_EQ(mask->get_header_value("X-Provenance"), "annotated");
    EXPECT_TRUE(torch::equal(decode_mask(mask->body), clip_.masks[0]));
    EXPECT_EQ(frame(id, 2, "soft_mask")->status, 200);
    EXPECT_EQ(frame(id, 2, "bogus")->status, 400);
    EXPECT_EQ(frame(id, 9, "mask")->status, 404);

    const auto tag = completed->get_header_value("ETag");
    EXPECT_FALSE(tag.empty());
    EXPECT_EQ(frame(id, 2, "completed")->get_header_value("ETag"), tag);
    EXPECT_EQ(frame(id, 2, "completed", {{"If-None-Match", tag}})->status, 304);
}

TEST_F(ServiceTest, RunningSessionRejectsWritesAndSecondRun) {
    const auto id = upload();
    ASSERT_EQ(put_mask(id, 0, clip_.masks[0]), 200);
    backend_->close();
    ASSERT_EQ(client_->Post("/sessions/" + id + "/inpaint")->status, 202);
    EXPECT_EQ(status(id).at("status"), "running");
    EXPECT_EQ(client_->Post("/sessions/" + id + "/inpaint")->status, 409);
    EXPECT_EQ(put_mask(id, 3, clip_.masks[3]), 409);
    EXPECT_EQ(frame(id, 1, "completed")->status, 409);
    backend_->open();
    EXPECT_EQ(wait_done(id).at("status"), "done");

    // done -> running again after a refinement
    const auto before = frame(id, 1, "completed")->body;
    ASSERT_EQ(put_mask(id, 4, clip_.masks[4]), 200);
    ASSERT_EQ(client_->Post("/sessions/" + id + "/inpaint")->status, 202);
    const auto again = wait_done(id);
    EXPECT_EQ(again.at("provenance")[4], "annotated");
    // frame 1 stays owned by frame 0, so its output is untouched
    EXPECT_EQ(frame(id, 1, "completed")->body, before);
}

TEST_F(ServiceTest, SessionsAreIsolated) {
    const auto a = upload();
    const auto b = upload();
    ASSERT_NE(a, b);
    ASSERT_EQ(put_mask(a, 0, clip_.masks[0]), 200);
    ASSERT_EQ(client_->Post("/sessions/" + a + "/inpaint")->status, 202);
    wait_done(a);
    const auto sb = status(b);
    EXPECT_EQ(sb.at("status"), "idle");
    EXPECT_EQ(sb.at("annotations"), json::array());
    EXPECT_EQ(frame(b, 0, "completed")->status, 409);
}

TEST_F(ServiceTest, CompletedWorkSurvivesRestart) {
    const auto id = upload();
    ASSERT_EQ(put_mask(id, 0, clip_.masks[0]), 200);
    ASSERT_EQ(client_->Post("/sessions/" + id + "/inpaint")->status, 202);
    wait_done(id);
    const auto completed = frame(id, 3, "completed")->body;
    const auto soft = frame(id, 3, "soft_mask")->body;
    restart();
    const auto s = status(id);
    EXPECT_EQ(s.at("status"), "done");
    EXPECT_EQ(s.at("annotations"), json::array({0}));
    EXPECT_EQ(frame(id, 3, "completed")->body, completed);
    EXPECT_EQ(frame(id, 3, "soft_mask")->body, soft);
    EXPECT_EQ(frame(id, 3, "completed")->get_header_value("X-Provenance"), "predicted");
}

TEST_F(ServiceTest, UnknownSessionIs404) {
    EXPECT_EQ(client_->Get("/sessions/abc/status")->status, 404);
    EXPECT_EQ(client_->Post("/sessions/abc/inpaint")->status, 404);
    EXPECT_EQ(frame("abc", 0, "input")->status, 404);
}

TEST(SessionStore, InterruptedRunReloadsAsError) {
    test::TempDir dir;
    std::string id;
    {
        service::SessionStore store(dir.path());
        const auto clip = test::hard_clip("st", 2, 32, 12);
        auto s = store.create({clip.frames[0], clip.frames[1]});
        id = s->id;
        std::lock_guard lock(s->mutex);
        s->status = service::Status::Running;
        store.save_meta(*s);
    }
    service::SessionStore reloaded(dir.path());
    auto s = reloaded.find(id);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->status, service::Status::Error);
    EXPECT_FALSE(s->error.empty());
    EXPECT_EQ(s->length(), 2);
}
