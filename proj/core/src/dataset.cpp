#include "dasa/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "binio.hpp"
#include "dasa/rng.hpp"

namespace dasa {

namespace {

constexpr char kCacheMagic[8] = {'D', 'A', 'S', 'A', 'P', 'D', '1', '\0'};
constexpr std::uint32_t kCacheVersion = 1;

struct Center {
  std::size_t x;
  std::size_t y;
};

}  // namespace

void PatchDataset::validate() const {
  if (!labels.empty() && labels.size() != patches.size()) {
    throw std::invalid_argument("PatchDataset: " + std::to_string(labels.size()) +
                                " labels vs " + std::to_string(patches.size()) +
                                " patches");
  }
  for (const Vector& p : patches) {
    check_dim("PatchDataset patch length", p.size(), patch_dim);
  }
}

Vector extract_patch(const RasterImage& img, std::size_t cx, std::size_t cy,
                     std::size_t side) {
  if (side == 0 || side % 2 == 0) {
    throw std::invalid_argument("extract_patch: side must be odd, got " +
                                std::to_string(side));
  }
  const std::size_t half = side / 2;
  if (cx < half || cy < half || cx + half >= img.width || cy + half >= img.height) {
    throw std::invalid_argument(
        "extract_patch: window of side " + std::to_string(side) + " centered at (" +
        std::to_string(cx) + "," + std::to_string(cy) + ") overflows " +
        std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
  }
  Vector out;
  out.reserve(side * side * img.channels);
  for (std::size_t y = cy - half; y <= cy + half; ++y) {
    for (std::size_t x = cx - half; x <= cx + half; ++x) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.push_back(img.at(x, y, c));
      }
    }
  }
  return out;
}

std::size_t valid_center_count(const RasterImage& img, std::size_t side) {
  if (img.width < side || img.height < side) {
    return 0;
  }
  return (img.width - side + 1) * (img.height - side + 1);
}

PatchDataset sample_patches(std::span<const SampleInput> images, double fraction,
                            std::size_t side, std::uint64_t seed,
                            std::string source_tag) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("sample_patches: fraction must lie in (0,1], got " +
                                std::to_string(fraction));
  }
  if (images.empty()) {
    throw std::invalid_argument("sample_patches: no images given");
  }

  bool all_masked = true;
  bool any_masked = false;
  for (const SampleInput& si : images) {
    all_masked = all_masked && si.mask != nullptr;
    any_masked = any_masked || si.mask != nullptr;
  }
  if (any_masked && !all_masked) {
    throw std::invalid_argument(
        "sample_patches: either all or none of the images may carry masks");
  }

  PatchDataset ds;
  ds.patch_dim = side * side * images[0].image->channels;
  ds.source_tag = std::move(source_tag);
  ds.seed = seed;

  Rng rng(seed);
  const std::size_t half = side / 2;
  std::vector<Center> centers;
  for (const SampleInput& si : images) {
    const RasterImage& img = *si.image;
    img.validate();
    if (si.mask != nullptr &&
        (si.mask->width != img.width || si.mask->height != img.height)) {
      throw std::invalid_argument("sample_patches: mask dimensions do not match image");
    }
    if (si.fov != nullptr &&
        (si.fov->width != img.width || si.fov->height != img.height)) {
      throw std::invalid_argument("sample_patches: fov dimensions do not match image");
    }

    centers.clear();
    if (img.width >= side && img.height >= side) {
      for (std::size_t cy = half; cy + half < img.height; ++cy) {
        for (std::size_t cx = half; cx + half < img.width; ++cx) {
          if (si.fov != nullptr && si.fov->at(cx, cy) <= 0.5) {
            continue;
          }
          centers.push_back({cx, cy});
        }
      }
    }
    if (centers.empty()) {
      throw std::invalid_argument("sample_patches: image has no valid patch centers");
    }

    const std::size_t take =
        static_cast<std::size_t>(fraction * static_cast<double>(centers.size()));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + rng.index(centers.size() - i);
      std::swap(centers[i], centers[j]);
      const Center c = centers[i];
      ds.patches.push_back(extract_patch(img, c.x, c.y, side));
      if (all_masked) {
        ds.labels.push_back(si.mask->at(c.x, c.y) > 0.5 ? 1 : 0);
      }
    }
  }
  ds.validate();
  return ds;
}

void save_patch_cache(const PatchDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_patch_cache: cannot open '" + path + "'");
  }
  out.write(kCacheMagic, sizeof(kCacheMagic));
  binio::write_u32(out, kCacheVersion);

  nlohmann::json meta;
  meta["patch_dim"] = ds.patch_dim;
  meta["count"] = ds.patches.size();
  meta["labeled"] = ds.labeled();
  meta["source_tag"] = ds.source_tag;
  meta["seed"] = ds.seed;
  const std::string header = meta.dump();
  binio::write_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  for (const Vector& p : ds.patches) {
    binio::write_f64_array(out, p);
  }
  for (int lab : ds.labels) {
    const unsigned char b = static_cast<unsigned char>(lab);
    out.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!out) {
    throw std::runtime_error("save_patch_cache: short write to '" + path + "'");
  }
}

PatchDataset load_patch_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_patch_cache: cannot open '" + path + "'");
  }
  char magic[sizeof(kCacheMagic)];
  binio::read_exact(in, magic, sizeof(magic), "magic");
  if (std::string(magic, sizeof(magic)) != std::string(kCacheMagic, sizeof(kCacheMagic))) {
    throw std::runtime_error("load_patch_cache: '" + path + "' is not a DASAPD1 container");
  }
  const std::uint32_t version = binio::read_u32(in, "version");
  if (version != kCacheVersion) {
    throw std::runtime_error("load_patch_cache: unsupported version " +
                             std::to_string(version));
  }
  const std::uint64_t header_len = binio::read_u64(in, "header length");
  std::string header(header_len, '\0');
  binio::read_exact(in, header.data(), header_len, "header");
  const nlohmann::json meta = nlohmann::json::parse(header);

  PatchDataset ds;
  ds.patch_dim = meta.at("patch_dim").get<std::size_t>();
  ds.source_tag = meta.at("source_tag").get<std::string>();
  ds.seed = meta.at("seed").get<std::uint64_t>();
  const std::size_t count = meta.at("count").get<std::size_t>();
  const bool labeled = meta.at("labeled").get<bool>();

  ds.patches.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ds.patches.push_back(binio::read_f64_array(in, ds.patch_dim, "patch values"));
  }
  if (labeled) {
    ds.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      unsigned char b;
      binio::read_exact(in, &b, 1, "labels");
      ds.labels[i] = b;
    }
  }
  ds.validate();
  return ds;
}

}  // namespace dasa
