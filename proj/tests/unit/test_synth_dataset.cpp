#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "glpd/dataset.hpp"
#include "glpd/image_io.hpp"
#include "glpd/sphere.hpp"
#include "glpd/synth.hpp"
#include "helpers.hpp"

using namespace glpd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("glpd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Synth, EmptyRoomMidlineMatchesRayBoxDistances) {
  SceneSpec spec;
  spec.height = 128;
  spec.empty_room = true;
  spec.center_camera = true;
  spec.min_half_extent = spec.max_half_extent = 2.5;
  spec.min_room_height = spec.max_room_height = 3.0;
  const PanoSample s = synth_generate(spec, 5);
  const int h = 128, w = 256;
  for (int v : {h / 2 - 1, h / 2}) {
    for (int u = 0; u < w; ++u) {
      const auto d = dir_from_equirect(u, v, w, h);
      // Camera at the room center; nearest wall plane along the ray.
      double t = 1e300;
      if (d.x != 0) t = std::min(t, 2.5 / std::abs(d.x));
      if (d.z != 0) t = std::min(t, 2.5 / std::abs(d.z));
      if (d.y != 0) t = std::min(t, 1.5 / std::abs(d.y));
      EXPECT_NEAR(s.depth[std::size_t(v * w + u)], t, 1e-6) << "u=" << u << " v=" << v;
    }
  }
}

TEST(Synth, DeterministicAndInContract) {
  SceneSpec spec;
  for (int h : {64, 128}) {
    spec.height = h;
    const PanoSample a = synth_generate(spec, 77), b = synth_generate(spec, 77);
    EXPECT_EQ(test::values(a.rgb), test::values(b.rgb));
    EXPECT_EQ(test::values(a.depth), test::values(b.depth));
    ASSERT_EQ(a.rgb.shape(), (Shape{3, std::size_t(h), std::size_t(2 * h)}));
    EXPECT_EQ(a.mask.count_valid, a.depth.size());
    for (double d : a.depth.data()) {
      EXPECT_GE(d, kSynthMinDepth);
      EXPECT_LE(d, kSynthMaxDepth);
    }
  }
  spec.height = 100;
  EXPECT_THROW(synth_generate(spec, 1), ContractError);
}

TEST(Synth, DifferentSeedsDiffer) {
  SceneSpec spec;
  EXPECT_NE(test::values(synth_generate(spec, 1).depth), test::values(synth_generate(spec, 2).depth));
}

TEST(Dataset, RoundTripAndScale) {
  const fs::path root = fresh_dir("ds_roundtrip");
  SceneSpec spec;
  for (int i = 0; i < 3; ++i) {
    PanoSample s = synth_generate(spec, std::uint64_t(i));
    s.name = "pano" + std::to_string(i);
    dataset_write_sample(root, "train", s);
  }
  const PanoDataset ds = dataset_load(root, "train");
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.entries()[0].name, "pano0");
  const PanoSample s = ds.load(1);
  const PanoSample ref = synth_generate(spec, 1);
  for (std::size_t i = 0; i < s.depth.size(); ++i) EXPECT_NEAR(s.depth[i], ref.depth[i], 0.5 / kDefaultDepthScale);

  const auto o1 = ds.epoch_order(3, 0), o2 = ds.epoch_order(3, 0);
  EXPECT_EQ(o1, o2);
  auto sorted = o1;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Dataset, RawValuesConvertByScale) {
  const fs::path root = fresh_dir("ds_scale");
  fs::create_directories(root / "val" / "rgb");
  fs::create_directories(root / "val" / "depth");
  write_png_rgb8(root / "val/rgb/a.png", Rgb8Image{4, 2, std::vector<std::uint8_t>(24, 100), {}});
  write_png_gray16(root / "val/depth/a.png", Gray16Image{4, 2, {4000, 0, 8000, 2000, 4000, 4000, 4000, 4000}});
  const PanoSample s = PanoDataset(root, "val").load(0);
  EXPECT_DOUBLE_EQ(s.depth[0], 1.0);
  EXPECT_FALSE(s.mask(1));
  EXPECT_DOUBLE_EQ(s.depth[2], 2.0);
  EXPECT_EQ(s.mask.count_valid, 7u);
}

TEST(Dataset, Errors) {
  const fs::path root = fresh_dir("ds_errors");
  EXPECT_THROW(PanoDataset(root, "bogus"), DatasetError);
  fs::create_directories(root / "test" / "rgb");
  fs::create_directories(root / "test" / "depth");
  EXPECT_THROW(PanoDataset(root, "test"), DatasetError);  // empty split

  write_png_rgb8(root / "test/rgb/big.png", Rgb8Image{8, 4, std::vector<std::uint8_t>(96, 1), {}});
  write_png_gray16(root / "test/depth/big.png", Gray16Image{4, 2, std::vector<std::uint16_t>(8, 4000)});
  PanoDataset ds(root, "test");
  try {
    ds.load(0);
    FAIL() << "size mismatch accepted";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("big.png"), std::string::npos);
  }

  write_png_rgb8(root / "test/rgb/orphan.png", Rgb8Image{8, 4, std::vector<std::uint8_t>(96, 1), {}});
  EXPECT_THROW(PanoDataset(root, "test"), DatasetError);
  fs::remove(root / "test/rgb/orphan.png");

  write_png_rgb8(root / "test/rgb/square.png", Rgb8Image{4, 4, std::vector<std::uint8_t>(48, 1), {}});
  write_png_gray16(root / "test/depth/square.png", Gray16Image{4, 4, std::vector<std::uint16_t>(16, 4000)});
  EXPECT_THROW(PanoDataset(root, "test").load(1), DatasetError);
}

TEST(Dataset, StreamSkipsEmptyDepth) {
  const fs::path root = fresh_dir("ds_skip");
  fs::create_directories(root / "train" / "rgb");
  fs::create_directories(root / "train" / "depth");
  for (const char* n : {"a", "b"}) write_png_rgb8(root / "train/rgb" / (std::string(n) + ".png"),
                                                  Rgb8Image{4, 2, std::vector<std::uint8_t>(24, 1), {}});
  write_png_gray16(root / "train/depth/a.png", Gray16Image{4, 2, std::vector<std::uint16_t>(8, 0)});
  write_png_gray16(root / "train/depth/b.png", Gray16Image{4, 2, std::vector<std::uint16_t>(8, 100)});
  PanoDataset ds(root, "train");
  PanoStream stream(ds, {0, 1});
  auto s = stream.next();
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->name, "b");
  EXPECT_FALSE(stream.next().has_value());
  EXPECT_EQ(stream.skipped(), 1u);
}

TEST(ImageIo, PfmRoundTripAndPngText) {
  const fs::path dir = fresh_dir("imgio");
  const std::vector<float> vals = {1.0f, 2.5f, -3.0f, 0.125f, 7.0f, 8.0f};
  write_pfm(dir / "x.pfm", 3, 2, vals);
  int w = 0, h = 0;
  EXPECT_EQ(read_pfm(dir / "x.pfm", w, h), vals);
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);

  Rgb8Image img{2, 1, {1, 2, 3, 4, 5, 6}, {{"face_order", "back,down"}}};
  write_png_rgb8(dir / "t.png", img);
  const Rgb8Image back = read_png_rgb8(dir / "t.png");
  EXPECT_EQ(back.pixels, img.pixels);
  EXPECT_EQ(back.text.at("face_order"), "back,down");
  EXPECT_THROW(read_png_rgb8(dir / "missing.png"), ImageIoError);
}
