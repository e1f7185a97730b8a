#pragma once

// Deterministic synthetic target image: smooth gradients, hard edges, a
// periodic texture patch, a fine checkerboard, low-amplitude random texture
// and sparse bright impulses (the last exercise outlier-removing filters).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rendition/filters.hpp"
#include "rendition/image.hpp"

namespace rendition {

inline Image procedural_test_image(int size = 256, int channels = 1, std::uint64_t seed = 7) {
  const Shape plane_shape{size, size, 1};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Image grain(plane_shape);
  for (double& v : grain.samples()) v = unit(rng) - 0.5;
  grain = gaussian_blur(grain, 7, 1.2);

  std::vector<Image> planes;
  for (int c = 0; c < channels; ++c) {
    Image img(plane_shape);
    const double tint = 0.08 * c;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double u = (x + 0.5) / size;
        const double v = (y + 0.5) / size;
        double val = 0.25 + 0.35 * u + 0.15 * v + tint * (1.0 - u);
        if (u > 0.10 && u < 0.45 && v > 0.12 && v < 0.40) val = 0.82 - tint;  // block
        const double du = u - 0.72, dv = v - 0.28;
        if (du * du + dv * dv < 0.016) val = 0.18 + tint;                      // disk
        if (u > 0.08 && u < 0.46 && v > 0.55 && v < 0.90) {                    // texture
          val = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * x / 7.0) *
                          std::sin(2.0 * std::numbers::pi * y / 11.0);
        }
        if (u > 0.58 && u < 0.92 && v > 0.58 && v < 0.92) {                    // checkerboard
          val = ((x / 4 + y / 4) % 2 == 0) ? 0.32 : 0.68;
        }
        img.at(x, y) = val + 0.25 * grain.at(x, y);
      }
    }
    planes.push_back(std::move(img));
  }

  // Impulses shared by all channels.
  std::bernoulli_distribution spark(0.004);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (spark(rng)) {
        for (auto& p : planes) p.at(x, y) = 0.95;
      }
    }
  }
  Image out = merge_channels(planes);
  return clamp01(out);
}

}  // namespace rendition
