#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    Outcome run(const std::string& args) {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const auto cmd = std::string(SVI_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // Small corpus: 2 clips of 4 frames at 32x32.
    void synth() {
        const auto r = run("synth -o " + path("data") + " -n 2 -s data.frames=4 -s data.height=32 -s data.width=32");
        ASSERT_EQ(r.code, 0) << r.err;
    }

    svi::test::TempDir dir_{"svi-cli"};
};

json corpus_line(const std::filesystem::path& jsonl) {
    std::ifstream in(jsonl);
    std::string line;
    std::string last;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            last = line;
        }
    }
    return json::parse(last);
}

}  // namespace

TEST_F(CliTest, OracleRoundTripScoresPerfectly) {
    synth();
    ASSERT_TRUE(std::filesystem::exists(path("data/manifest.jsonl")));
    ASSERT_TRUE(std::filesystem::exists(path("data/resolved_config.json")));
    const auto inf = run("infer -m oracle -i " + path("data") + " -o " + path("res") + " -s 'infer.annotate=[0,-1]'");
    ASSERT_EQ(inf.code, 0) << inf.err;
    EXPECT_EQ(json::parse(inf.out).at("clips"), 2);
    const auto ev = run("eval -r " + path("res") + " -g " + path("data") + " -o " + path("ev"));
    ASSERT_EQ(ev.code, 0) << ev.err;
    const auto corpus = corpus_line(path("ev/eval.jsonl"));
    EXPECT_EQ(corpus.at("psnr"), 99.0);
    EXPECT_NEAR(corpus.at("ssim").get<double>(), 1.0, 1e-6);
    EXPECT_EQ(corpus.at("iou"), 1.0);
    EXPECT_TRUE(corpus.at("lpips").is_null());
    EXPECT_NE(ev.out.find("corpus"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(path("ev/eval_table.txt")));
}

TEST_F(CliTest, TrainInferEvalEndToEnd) {
    synth();
    const std::string tiny = " -s model.channels=8 -s model.encoder_blocks=1 -s model.decoder_blocks=1 -s model.dca_blocks=1";
    const auto tr = run("train -d " + path("data") + " -o " + path("ck") + " --steps 3 -s optim.batch_size=2 -s optim.crop_size=32" + tiny);
    ASSERT_EQ(tr.code, 0) << tr.err;
    ASSERT_TRUE(std::filesystem::exists(path("ck/latest.ckpt")));
    EXPECT_TRUE(std::filesystem::exists(path("ck/resolved_config.json")));
    std::ifstream log(path("ck/train_log.jsonl"));
    int lines = 0;
    for (std::string l; std::getline(log, l);) {
        EXPECT_TRUE(json::parse(l).contains("total"));
        ++lines;
    }
    EXPECT_EQ(lines, 3);

    // resuming to a later step continues from the stored checkpoint
    const auto more = run("train -d " + path("data") + " -o " + path("ck") + " --steps 4 -s optim.batch_size=2 -s optim.crop_size=32" + tiny);
    ASSERT_EQ(more.code, 0) << more.err;

    const auto inf = run("infer -m " + path("ck/latest.ckpt") + " -i " + path("data") + " -o " + path("res"));
    ASSERT_EQ(inf.code, 0) << inf.err;
    EXPECT_TRUE(std::filesystem::exists(path("res/manifest.jsonl")));
    const auto ev = run("eval -r " + path("res") + " -g " + path("data") + " -o " + path("ev"));
    ASSERT_EQ(ev.code, 0) << ev.err;
    const auto corpus = corpus_line(path("ev/eval.jsonl"));
    EXPECT_EQ(corpus.at("frames"), 8);
    EXPECT_GT(corpus.at("psnr").get<double>(), 0.0);
}

TEST_F(CliTest, ErrorsAreStructuredWithExitCodes) {
    const auto bad = run("synth -o " + path("d") + " -s bogus=1 -s model.nope=2");
    EXPECT_EQ(bad.code, 2);
    const auto err = json::parse(bad.err);
    EXPECT_EQ(err.at("error"), "config");
    EXPECT_EQ(err.at("keys"), json::array({"bogus", "model.nope"}));

    const auto range = run("synth -o " + path("d") + " -s model.dca_blocks=9");
    EXPECT_EQ(range.code, 2);
    EXPECT_NE(range.err.find("model.dca_blocks"), std::string::npos);

    const auto missing = run("infer -m " + path("none.ckpt") + " -i " + path("d") + " -o " + path("r"));
    EXPECT_EQ(missing.code, 3);
    EXPECT_EQ(json::parse(missing.err).at("path"), path("none.ckpt"));

    EXPECT_NE(run("").code, 0);
    EXPECT_NE(run("frobnicate").code, 0);
}
