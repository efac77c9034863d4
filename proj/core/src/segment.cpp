#include "dasa/segment.hpp"

#include <stdexcept>
#include <string>

#include "dasa/dataset.hpp"

namespace dasa {

ProbabilityMap segment_image(const SaeDnnModel& m, const RasterImage& img,
                             std::size_t side, const RasterImage* fov) {
  m.validate();
  img.validate();
  if (img.width < side || img.height < side) {
    throw std::invalid_argument("segment_image: " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) +
                                " image is smaller than patch side " +
                                std::to_string(side));
  }
  check_dim("segment_image patch length vs model input", side * side * img.channels,
            m.input_dim());
  if (fov != nullptr && (fov->width != img.width || fov->height != img.height)) {
    throw std::invalid_argument("segment_image: fov dimensions do not match image");
  }

  ProbabilityMap map;
  map.width = img.width;
  map.height = img.height;
  map.prob.assign(img.width * img.height, 0.0);
  map.valid.assign(img.width * img.height, 0);

  const std::size_t half = side / 2;
  std::vector<Vector> patches;
  std::vector<std::size_t> xs;

  // one forward pass per image row of centers
  for (std::size_t cy = half; cy + half < img.height; ++cy) {
    patches.clear();
    xs.clear();
    for (std::size_t cx = half; cx + half < img.width; ++cx) {
      if (fov != nullptr && fov->at(cx, cy) <= 0.5) {
        continue;
      }
      patches.push_back(extract_patch(img, cx, cy, side));
      xs.push_back(cx);
    }
    if (patches.empty()) {
      continue;
    }
    const Vector probs = predict_vessel_prob_batch(m, Matrix::from_rows(patches));
    for (std::size_t r = 0; r < xs.size(); ++r) {
      map.prob[cy * img.width + xs[r]] = probs[r];
      map.valid[cy * img.width + xs[r]] = 1;
    }
  }
  return map;
}

void save_prob_map(const ProbabilityMap& map, const std::string& path) {
  Matrix values(map.height, map.width);
  for (std::size_t i = 0; i < map.prob.size(); ++i) {
    values.values()[i] = map.valid[i] != 0 ? map.prob[i] : 0.0;
  }
  save_pgm16(values, path);
}

void collect_scored_pixels(const ProbabilityMap& map, const RasterImage& mask,
                           std::vector<double>& probs, std::vector<int>& labels) {
  if (mask.width != map.width || mask.height != map.height) {
    throw std::invalid_argument("collect_scored_pixels: mask dimensions do not match map");
  }
  for (std::size_t y = 0; y < map.height; ++y) {
    for (std::size_t x = 0; x < map.width; ++x) {
      if (!map.is_valid(x, y)) {
        continue;
      }
      probs.push_back(map.at(x, y));
      labels.push_back(mask.at(x, y) > 0.5 ? 1 : 0);
    }
  }
}

}  // namespace dasa
