#include "svi/data/dataset.hpp"
#include "svi/error.hpp"
#include "svi/image.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace svi;
using namespace svi::data;

TEST(Dataset, WriteThenReadGivesEqualIndex) {
    test::TempDir dir;
    DatasetIndex index;
    index.clips.push_back(write_clip(dir.path(), "train", test::hard_clip("c0", 3, 32, 1)));
    index.clips.push_back(write_clip(dir.path(), "val", test::hard_clip("c1", 4, 32, 2)));
    write_manifest(dir.path(), index);
    const auto back = read_manifest(dir.path());
    EXPECT_EQ(back, index);
    EXPECT_EQ(back.split("val").size(), 1U);
}

TEST(Dataset, EmptyDatasetRoundTrips) {
    test::TempDir dir;
    write_manifest(dir.path(), DatasetIndex{});
    EXPECT_TRUE(read_manifest(dir.path()).clips.empty());
}

TEST(Dataset, MissingFrameFileNamedInError) {
    test::TempDir dir;
    DatasetIndex index;
    index.clips.push_back(write_clip(dir.path(), "train", test::hard_clip("c0", 3, 32, 1)));
    write_manifest(dir.path(), index);
    const auto victim = dir.path() / "train" / "c0" / "masks" / frame_file_name(1);
    std::filesystem::remove(victim);
    try {
        read_manifest(dir.path());
        FAIL() << "expected an IoError";
    } catch (const IoError& e) {
        EXPECT_EQ(e.path(), victim);
        EXPECT_NE(std::string(e.what()).find(victim.string()), std::string::npos);
    }
}

TEST(Dataset, MalformedRecordReportsLine) {
    test::TempDir dir;
    std::ofstream(dir.path() / kManifestName) << "{\"clip_id\": \"a\"}\n";
    try {
        read_manifest(dir.path(), false);
        FAIL() << "expected an IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(Dataset, ClipPixelsSurviveStorage) {
    test::TempDir dir;
    const auto clip = test::hard_clip("c0", 3, 32, 4);
    const auto record = write_clip(dir.path(), "train", clip);
    const auto back = load_clip(dir.path(), record);
    EXPECT_TRUE(torch::equal(back.masks, clip.masks));
    EXPECT_LE((back.frames - clip.frames).abs().max().item<float>(), 0.5F / 255.0F + 1e-6F);
}

TEST(Image, PngRoundTripIsLosslessOnTheByteGrid) {
    test::TempDir dir;
    const auto img = quantize8(torch::rand({3, 9, 7}));
    write_png(dir / "a.png", img);
    EXPECT_TRUE(torch::allclose(read_frame_png(dir / "a.png"), img, 0.0, 1e-7));
    const auto bytes = encode_png(img);
    EXPECT_TRUE(torch::allclose(decode_png(bytes, 3), img, 0.0, 1e-7));
    EXPECT_THROW(read_frame_png(dir / "missing.png"), IoError);
}
