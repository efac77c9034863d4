#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dasa/image.hpp"
#include "dasa/sae_dnn.hpp"

namespace dasa {

// Per-pixel vessel probabilities; border pixels (and pixels outside the FOV)
// have valid == 0 and probability 0.
struct ProbabilityMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> prob;
  std::vector<std::uint8_t> valid;

  double at(std::size_t x, std::size_t y) const { return prob[y * width + x]; }
  bool is_valid(std::size_t x, std::size_t y) const { return valid[y * width + x] != 0; }
};

ProbabilityMap segment_image(const SaeDnnModel& m, const RasterImage& img,
                             std::size_t side, const RasterImage* fov = nullptr);

// 16-bit PGM; invalid pixels are written as 0.
void save_prob_map(const ProbabilityMap& map, const std::string& path);

// Gathers (probability, label) pairs over the map's valid pixels for metric
// computation against a ground-truth mask.
void collect_scored_pixels(const ProbabilityMap& map, const RasterImage& mask,
                           std::vector<double>& probs, std::vector<int>& labels);

}  // namespace dasa
