#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dasa/image.hpp"

namespace dasa {

// Affine per-channel shift plus pixel noise; models a change in color
// statistics between acquisition setups. Results are clipped back to [0,1].
struct ShiftSpec {
  std::array<double, 3> channel_gain{1.0, 1.0, 1.0};
  std::array<double, 3> channel_bias{0.0, 0.0, 0.0};
  double noise_sigma = 0.0;

  bool is_identity() const {
    return channel_gain == std::array<double, 3>{1.0, 1.0, 1.0} &&
           channel_bias == std::array<double, 3>{0.0, 0.0, 0.0} && noise_sigma == 0.0;
  }
};

struct SynthImage {
  RasterImage image;  // 3-channel
  RasterImage mask;   // 1-channel, values in {0,1}; 1 marks vessel pixels
};

struct DomainPair {
  std::vector<SynthImage> source;
  std::vector<SynthImage> target;
};

// Generates images of dark curvilinear structures on a textured background
// with exact masks. Target image i shares source image i's content and then
// receives the channel shift, so an identity shift makes the sets
// pixel-identical. Deterministic per seed.
DomainPair synth_domain_pair(std::size_t n_images, std::size_t width, std::size_t height,
                             std::uint64_t vessel_model_seed, const ShiftSpec& shift);

// Applies a shift to one image (used by the pair generator; exposed for tests).
RasterImage apply_shift(const RasterImage& img, const ShiftSpec& shift,
                        std::uint64_t noise_seed);

// Writes images/NNN.ppm and masks/NNN.pgm under root.
void write_synth_dir(const std::vector<SynthImage>& set, const std::filesystem::path& root);

}  // namespace dasa
