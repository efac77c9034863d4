#include "dasa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dasa/rng.hpp"

namespace dasa {

namespace {

constexpr std::size_t kMinDim = 16;

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

// Background plus dark curvilinear tracks; the factor map keeps vessel
// darkening idempotent where discs of one track overlap.
SynthImage render_image(std::size_t width, std::size_t height, std::uint64_t seed) {
  Rng rng(seed);

  RasterImage img = RasterImage::make(width, height, 3);
  const double base[3] = {rng.uniform(0.70, 0.88), rng.uniform(0.40, 0.56),
                          rng.uniform(0.20, 0.34)};

  struct Wave {
    double kx, ky, phase, amp;
  };
  Wave waves[3];
  for (Wave& w : waves) {
    const double cycles = rng.uniform(1.0, 3.0);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    w.kx = 6.283185307179586 * cycles * std::cos(angle) / static_cast<double>(width);
    w.ky = 6.283185307179586 * cycles * std::sin(angle) / static_cast<double>(height);
    w.phase = rng.uniform(0.0, 6.283185307179586);
    w.amp = rng.uniform(0.03, 0.08);
  }

  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double texture = 0.0;
      for (const Wave& w : waves) {
        texture += w.amp * std::cos(w.kx * static_cast<double>(x) +
                                    w.ky * static_cast<double>(y) + w.phase);
      }
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = base[c] + texture + 0.025 * rng.normal();
        img.at(x, y, c) = std::clamp(v, 0.02, 0.98);
      }
    }
  }

  // Per-channel darkening so a vessel is a color signature, not just a
  // luminance dip; faint vessels make the classification genuinely hard.
  std::vector<double> factor(width * height * 3, 1.0);
  const std::size_t n_vessels = 3 + rng.index(4);
  for (std::size_t v = 0; v < n_vessels; ++v) {
    double px = rng.uniform(0.15, 0.85) * static_cast<double>(width);
    double py = rng.uniform(0.15, 0.85) * static_cast<double>(height);
    double heading = rng.uniform(0.0, 6.283185307179586);
    const double half_width = rng.uniform(0.6, 1.5);
    const double dark[3] = {rng.uniform(0.40, 0.72), rng.uniform(0.55, 0.88),
                            rng.uniform(0.65, 0.97)};
    const std::size_t steps = static_cast<std::size_t>(
        rng.uniform(0.8, 1.6) * static_cast<double>(width + height) / 2.0);

    for (std::size_t s = 0; s < steps; ++s) {
      const long lo_x = std::lround(px - half_width - 1.0);
      const long hi_x = std::lround(px + half_width + 1.0);
      const long lo_y = std::lround(py - half_width - 1.0);
      const long hi_y = std::lround(py + half_width + 1.0);
      for (long yy = lo_y; yy <= hi_y; ++yy) {
        for (long xx = lo_x; xx <= hi_x; ++xx) {
          if (xx < 0 || yy < 0 || xx >= static_cast<long>(width) ||
              yy >= static_cast<long>(height)) {
            continue;
          }
          const double dx = static_cast<double>(xx) - px;
          const double dy = static_cast<double>(yy) - py;
          if (dx * dx + dy * dy <= half_width * half_width) {
            const std::size_t base =
                (static_cast<std::size_t>(yy) * width + static_cast<std::size_t>(xx)) * 3;
            for (std::size_t c = 0; c < 3; ++c) {
              factor[base + c] = std::min(factor[base + c], dark[c]);
            }
          }
        }
      }
      heading += 0.18 * rng.normal();
      px += std::cos(heading);
      py += std::sin(heading);
      if (px < 1.0 || py < 1.0 || px >= static_cast<double>(width) - 1.0 ||
          py >= static_cast<double>(height) - 1.0) {
        break;
      }
    }
  }

  SynthImage out;
  out.mask = RasterImage::make(width, height, 1);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t base = (y * width + x) * 3;
      if (factor[base] < 1.0 || factor[base + 1] < 1.0 || factor[base + 2] < 1.0) {
        out.mask.at(x, y) = 1.0;
        for (std::size_t c = 0; c < 3; ++c) {
          img.at(x, y, c) *= factor[base + c];
        }
      }
    }
  }
  out.image = std::move(img);
  return out;
}

}  // namespace

RasterImage apply_shift(const RasterImage& img, const ShiftSpec& shift,
                        std::uint64_t noise_seed) {
  img.validate();
  if (img.channels != 3) {
    throw std::invalid_argument("apply_shift: expected a 3-channel image");
  }
  RasterImage out = img;
  Rng rng(noise_seed);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const std::size_t c = i % 3;
    double v = shift.channel_gain[c] * out.pixels[i] + shift.channel_bias[c];
    if (shift.noise_sigma > 0.0) {
      v += shift.noise_sigma * rng.normal();
    }
    out.pixels[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

DomainPair synth_domain_pair(std::size_t n_images, std::size_t width, std::size_t height,
                             std::uint64_t vessel_model_seed, const ShiftSpec& shift) {
  if (n_images == 0) {
    throw std::invalid_argument("synth_domain_pair: need at least one image");
  }
  if (width < kMinDim || height < kMinDim) {
    throw std::invalid_argument("synth_domain_pair: dimensions must be at least " +
                                std::to_string(kMinDim) + ", got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }

  DomainPair pair;
  pair.source.reserve(n_images);
  pair.target.reserve(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    SynthImage src = render_image(width, height, mix(vessel_model_seed, 1, i));

    bool has_vessel = false;
    bool has_background = false;
    for (double m : src.mask.pixels) {
      if (m > 0.5) {
        has_vessel = true;
      } else {
        has_background = true;
      }
    }
    if (!has_vessel || !has_background) {
      throw std::runtime_error("synth_domain_pair: generated mask lost a class");
    }

    SynthImage tgt;
    tgt.image = apply_shift(src.image, shift, mix(vessel_model_seed, 2, i));
    tgt.mask = src.mask;
    pair.source.push_back(std::move(src));
    pair.target.push_back(std::move(tgt));
  }
  return pair;
}

void write_synth_dir(const std::vector<SynthImage>& set, const std::filesystem::path& root) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "masks");
  char name[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::snprintf(name, sizeof(name), "%03zu", i);
    save_image(set[i].image, (root / "images" / (std::string(name) + ".ppm")).string());
    save_image(set[i].mask, (root / "masks" / (std::string(name) + ".pgm")).string());
  }
}

}  // namespace dasa
