#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dasa/image.hpp"
#include "dasa/matrix.hpp"

namespace dasa {

// Flattened, normalized patches with optional class labels and provenance.
struct PatchDataset {
  std::size_t patch_dim = 0;  // side^2 * channels
  std::vector<Vector> patches;
  std::vector<int> labels;  // empty when unlabeled; else aligned 1:1
  std::string source_tag;
  std::uint64_t seed = 0;

  bool labeled() const { return !labels.empty(); }
  std::size_t size() const { return patches.size(); }

  void validate() const;
};

// Channel-interleaved, row-major window of side x side centered at (cx, cy).
// The window must lie fully inside the image and side must be odd.
Vector extract_patch(const RasterImage& img, std::size_t cx, std::size_t cy,
                     std::size_t side);

// Number of stride-1 window positions fully inside the image.
std::size_t valid_center_count(const RasterImage& img, std::size_t side);

struct SampleInput {
  const RasterImage* image = nullptr;
  const RasterImage* mask = nullptr;  // single-channel ground truth, optional
  const RasterImage* fov = nullptr;   // single-channel field of view, optional
};

// Enumerates all valid stride-1 centers per image (restricted to the FOV when
// given), draws floor(fraction * count) of them uniformly without replacement
// with a seeded RNG, and labels each patch by the mask value at its center
// pixel. Labels are emitted only when every input carries a mask.
PatchDataset sample_patches(std::span<const SampleInput> images, double fraction,
                            std::size_t side, std::uint64_t seed,
                            std::string source_tag = "");

// Versioned binary cache (magic DASAPD1).
void save_patch_cache(const PatchDataset& ds, const std::string& path);
PatchDataset load_patch_cache(const std::string& path);

}  // namespace dasa
