#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "dasa/dataset.hpp"
#include "dasa/image.hpp"
#include "dasa/rng.hpp"
#include "dasa/synth.hpp"

using namespace dasa;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

RasterImage quantized_random(std::size_t w, std::size_t h, std::size_t channels,
                             std::uint64_t seed) {
  RasterImage img = RasterImage::make(w, h, channels);
  Rng rng(seed);
  for (double& p : img.pixels) {
    p = static_cast<double>(rng.index(256)) / 255.0;
  }
  return img;
}

}  // namespace

TEST_CASE("load_image: 1x1 white binary PPM") {
  const auto path = tmp_file("white.ppm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n1 1\n255\n";
    out.put('\xff');
    out.put('\xff');
    out.put('\xff');
  }
  const RasterImage img = load_image(path.string());
  CHECK(img.width == 1);
  CHECK(img.height == 1);
  CHECK(img.channels == 3);
  for (double p : img.pixels) {
    CHECK(p == 1.0);
  }
  fs::remove(path);
}

TEST_CASE("load_image: 2x2 PGM scales by 1/255") {
  const auto path = tmp_file("gray.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment\n2 2\n255\n";
    for (unsigned char v : {0, 85, 170, 255}) {
      out.put(static_cast<char>(v));
    }
  }
  const RasterImage img = load_image(path.string());
  REQUIRE(img.pixels.size() == 4);
  CHECK(img.pixels[0] == 0.0);
  CHECK(img.pixels[1] == 85.0 / 255.0);
  CHECK(img.pixels[2] == 170.0 / 255.0);
  CHECK(img.pixels[3] == 1.0);
  fs::remove(path);
}

TEST_CASE("save/load round trips are value-exact at 8-bit depth") {
  const RasterImage rgb = quantized_random(9, 7, 3, 5);
  const RasterImage gray = quantized_random(6, 8, 1, 6);
  for (const char* ext : {".ppm", ".png"}) {
    const auto path = tmp_file(std::string("rt_rgb") + ext);
    save_image(rgb, path.string());
    CHECK(load_image(path.string()) == rgb);
    fs::remove(path);
  }
  for (const char* ext : {".pgm", ".png"}) {
    const auto path = tmp_file(std::string("rt_gray") + ext);
    save_image(gray, path.string());
    CHECK(load_image(path.string()) == gray);
    fs::remove(path);
  }
}

TEST_CASE("save_pgm16 emits a 16-bit map that reloads exactly") {
  Matrix values(2, 3);
  const double quantum = 1.0 / 65535.0;
  values(0, 0) = 0.0;
  values(0, 1) = 13107.0 * quantum;
  values(0, 2) = 1.0;
  values(1, 0) = 0.5000076295109483;  // 32768/65535
  values(1, 1) = quantum;
  values(1, 2) = 65534.0 * quantum;
  const auto path = tmp_file("map.pgm");
  save_pgm16(values, path.string());
  const RasterImage img = load_image(path.string());
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(img.pixels[i] == doctest::Approx(values.values()[i]).epsilon(1e-12));
  }
  fs::remove(path);
}

TEST_CASE("load_image: unsupported input names the path and formats") {
  const auto path = tmp_file("bogus.dat");
  std::ofstream(path) << "not an image";
  try {
    load_image(path.string());
    FAIL("expected a load error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find(path.string()) != std::string::npos);
    CHECK(msg.find("PPM") != std::string::npos);
    CHECK(msg.find("PNG") != std::string::npos);
  }
  CHECK_THROWS_AS(load_image("/nonexistent/nowhere.png"), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("extract_patch: side 1 yields the center pixel channels") {
  const RasterImage img = quantized_random(5, 5, 3, 9);
  const Vector p = extract_patch(img, 2, 3, 1);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == img.at(2, 3, 0));
  CHECK(p[1] == img.at(2, 3, 1));
  CHECK(p[2] == img.at(2, 3, 2));
}

TEST_CASE("extract_patch: constant image gives a constant vector of the right length") {
  RasterImage img = RasterImage::make(20, 20, 3, 0.25);
  const Vector p = extract_patch(img, 9, 9, 15);
  CHECK(p.size() == 675);  // 15 x 15 x 3
  for (double v : p) {
    CHECK(v == 0.25);
  }
}

TEST_CASE("extract_patch: window overflow and even side rejected") {
  const RasterImage img = quantized_random(10, 10, 1, 10);
  CHECK_THROWS_AS(extract_patch(img, 0, 5, 3), std::invalid_argument);
  CHECK_THROWS_AS(extract_patch(img, 5, 9, 3), std::invalid_argument);
  CHECK_THROWS_AS(extract_patch(img, 5, 5, 4), std::invalid_argument);
  CHECK_NOTHROW(extract_patch(img, 1, 1, 3));
}

TEST_CASE("sample_patches: full fraction on a 17x17 image with side 15 gives 9 patches") {
  const RasterImage img = quantized_random(17, 17, 3, 11);
  CHECK(valid_center_count(img, 15) == 9);
  const SampleInput input{&img, nullptr, nullptr};
  const PatchDataset ds = sample_patches({&input, 1}, 1.0, 15, 3, "toy");
  CHECK(ds.size() == 9);
  CHECK(ds.patch_dim == 675);
  CHECK(!ds.labeled());
  for (const Vector& p : ds.patches) {
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("sample_patches: same seed reproduces the same multiset") {
  const RasterImage img = quantized_random(21, 19, 3, 12);
  const SampleInput input{&img, nullptr, nullptr};
  const PatchDataset a = sample_patches({&input, 1}, 0.3, 5, 99, "a");
  const PatchDataset b = sample_patches({&input, 1}, 0.3, 5, 99, "b");
  CHECK(a.patches == b.patches);
  const PatchDataset c = sample_patches({&input, 1}, 0.3, 5, 100, "c");
  CHECK(a.patches != c.patches);
}

TEST_CASE("sample_patches: labels equal the mask value at each sampled center") {
  // mask derived from the image itself so labels can be recounted per patch
  RasterImage img = quantized_random(25, 25, 1, 13);
  RasterImage mask = RasterImage::make(25, 25, 1);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    mask.pixels[i] = img.pixels[i] > 0.5 ? 1.0 : 0.0;
  }
  const SampleInput input{&img, &mask, nullptr};
  const std::size_t side = 5;
  const PatchDataset ds = sample_patches({&input, 1}, 0.5, side, 14, "labeled");
  REQUIRE(ds.labeled());
  const std::size_t center_index = (side * side) / 2;  // single channel
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int expected = ds.patches[i][center_index] > 0.5 ? 1 : 0;
    CHECK(ds.labels[i] == expected);
  }
}

TEST_CASE("sample_patches: fov restricts centers") {
  RasterImage img = RasterImage::make(30, 30, 1, 0.2);
  for (std::size_t y = 10; y < 20; ++y) {
    for (std::size_t x = 10; x < 20; ++x) {
      img.at(x, y) = 0.9;  // bright block marks the fov interior
    }
  }
  RasterImage fov = RasterImage::make(30, 30, 1, 0.0);
  for (std::size_t y = 10; y < 20; ++y) {
    for (std::size_t x = 10; x < 20; ++x) {
      fov.at(x, y) = 1.0;
    }
  }
  const SampleInput input{&img, nullptr, &fov};
  const std::size_t side = 3;
  const PatchDataset ds = sample_patches({&input, 1}, 1.0, side, 15, "fov");
  CHECK(ds.size() == 100);  // all 10x10 fov centers
  const std::size_t center_index = (side * side) / 2;
  for (const Vector& p : ds.patches) {
    CHECK(p[center_index] == 0.9);
  }
}

TEST_CASE("sample_patches: errors") {
  const RasterImage small = quantized_random(4, 4, 1, 16);
  const SampleInput input{&small, nullptr, nullptr};
  CHECK_THROWS_AS(sample_patches({&input, 1}, 1.0, 5, 1, ""), std::invalid_argument);
  const RasterImage ok = quantized_random(9, 9, 1, 17);
  const SampleInput input2{&ok, nullptr, nullptr};
  CHECK_THROWS_AS(sample_patches({&input2, 1}, 0.0, 3, 1, ""), std::invalid_argument);
  CHECK_THROWS_AS(sample_patches({&input2, 1}, 1.1, 3, 1, ""), std::invalid_argument);
}

TEST_CASE("synth_domain_pair: identity shift makes source and target pixel-identical") {
  const DomainPair pair = synth_domain_pair(3, 32, 32, 2025, ShiftSpec{});
  REQUIRE(pair.source.size() == 3);
  REQUIRE(pair.target.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pair.source[i].image == pair.target[i].image);
    CHECK(pair.source[i].mask == pair.target[i].mask);
  }
}

TEST_CASE("synth_domain_pair: channel statistics track the affine shift") {
  ShiftSpec shift;
  shift.channel_gain = {0.9, 1.05, 1.1};
  shift.channel_bias = {0.02, -0.01, 0.03};
  shift.noise_sigma = 0.01;
  const DomainPair pair = synth_domain_pair(4, 48, 48, 77, shift);
  for (std::size_t c = 0; c < 3; ++c) {
    double src_mean = 0.0;
    double tgt_mean = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pair.source.size(); ++i) {
      for (std::size_t k = c; k < pair.source[i].image.pixels.size(); k += 3) {
        src_mean += pair.source[i].image.pixels[k];
        tgt_mean += pair.target[i].image.pixels[k];
        ++n;
      }
    }
    src_mean /= static_cast<double>(n);
    tgt_mean /= static_cast<double>(n);
    const double predicted = shift.channel_gain[c] * src_mean + shift.channel_bias[c];
    CHECK(tgt_mean == doctest::Approx(predicted).epsilon(0.03));
  }
}

TEST_CASE("synth_domain_pair: every mask carries both classes, deterministic per seed") {
  const DomainPair a = synth_domain_pair(3, 40, 40, 5, ShiftSpec{});
  for (const SynthImage& si : a.source) {
    bool vessel = false;
    bool background = false;
    for (double m : si.mask.pixels) {
      if (m > 0.5) {
        vessel = true;
      } else {
        background = true;
      }
    }
    CHECK(vessel);
    CHECK(background);
  }
  const DomainPair b = synth_domain_pair(3, 40, 40, 5, ShiftSpec{});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.source[i].image == b.source[i].image);
  }
  CHECK_THROWS_AS(synth_domain_pair(0, 40, 40, 1, ShiftSpec{}), std::invalid_argument);
  CHECK_THROWS_AS(synth_domain_pair(2, 4, 40, 1, ShiftSpec{}), std::invalid_argument);
}

TEST_CASE("patch cache: DASAPD1 round trip preserves everything") {
  RasterImage img = quantized_random(15, 15, 3, 21);
  RasterImage mask = RasterImage::make(15, 15, 1);
  for (std::size_t i = 0; i < mask.pixels.size(); ++i) {
    mask.pixels[i] = (i % 3 == 0) ? 1.0 : 0.0;
  }
  const SampleInput input{&img, &mask, nullptr};
  const PatchDataset ds = sample_patches({&input, 1}, 0.8, 5, 22, "cache-test");

  const auto path = tmp_file("ds.dasapd");
  save_patch_cache(ds, path.string());
  const PatchDataset loaded = load_patch_cache(path.string());
  CHECK(loaded.patch_dim == ds.patch_dim);
  CHECK(loaded.patches == ds.patches);
  CHECK(loaded.labels == ds.labels);
  CHECK(loaded.source_tag == ds.source_tag);
  CHECK(loaded.seed == ds.seed);

  // corrupting the magic must be rejected
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
  }
  CHECK_THROWS_AS(load_patch_cache(path.string()), std::runtime_error);
  fs::remove(path);
}
