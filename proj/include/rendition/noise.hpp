#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "rendition/image.hpp"

namespace rendition {

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Adds i.i.d. N(0, sigma^2) to every sample. The result is not clamped.
inline Image add_noise(const Image& img, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (spec.sigma == 0.0) return img;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, spec.sigma);
  Image out = img;
  for (double& v : out.samples()) v += gauss(rng);
  return out;
}

}  // namespace rendition
