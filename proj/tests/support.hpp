#pragma once

// Seeded generators and brute-force reference implementations for tests.
// The references are written from the operator definitions, independently of
// the library's padded/separable/vectorized code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rendition/image.hpp"

namespace rendition::testing {

inline Image random_image(const Shape& shape, std::uint64_t seed, double lo = 0.0,
                          double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(shape);
  for (double& v : img.samples()) v = u(rng);
  return img;
}

/// Runs `body(case_index, rng)` for `cases` generated cases.
inline void for_cases(int cases, std::uint64_t seed,
                      const std::function<void(int, std::mt19937_64&)>& body) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) body(i, rng);
}

inline Shape random_shape(std::mt19937_64& rng, int min_side, int max_side, bool allow_rgb = true) {
  std::uniform_int_distribution<int> side(min_side, max_side);
  std::bernoulli_distribution rgb(allow_rgb ? 0.3 : 0.0);
  return Shape{side(rng), side(rng), rgb(rng) ? 3 : 1};
}

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "rendition_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

/// Windowed weighted sum at (x, y, c) with replicate borders; offsets run
/// from -(n-1)/2 (integer division) upward.
inline Image reference_correlate(const Image& img, const std::vector<double>& kernel, int kw,
                                 int kh) {
  Image out(img.shape());
  const int ax = (kw - 1) / 2, ay = (kh - 1) / 2;
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0.0;
        for (int j = 0; j < kh; ++j)
          for (int i = 0; i < kw; ++i)
            acc += kernel[static_cast<std::size_t>(j) * kw + i] *
                   img.at_clamped(x + i - ax, y + j - ay, c);
        out.at(x, y, c) = acc;
      }
  return out;
}

inline Image reference_bilateral(const Image& img, double ss, double sr) {
  const int r = static_cast<int>(std::ceil(3.0 * ss));
  Image out(img.shape());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const double centre = img.at(x, y, c);
        double num = 0.0, den = 0.0;
        for (int j = -r; j <= r; ++j)
          for (int i = -r; i <= r; ++i) {
            const double v = img.at_clamped(x + i, y + j, c);
            const double w = std::exp(-(i * i + j * j) / (2.0 * ss * ss)) *
                             std::exp(-(v - centre) * (v - centre) / (2.0 * sr * sr));
            num += w * v;
            den += w;
          }
        out.at(x, y, c) = num / den;
      }
  return out;
}

inline Image reference_median(const Image& img, int wh, int ww) {
  Image out(img.shape());
  const int ax = (ww - 1) / 2, ay = (wh - 1) / 2;
  std::vector<double> buf;
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        buf.clear();
        for (int j = 0; j < wh; ++j)
          for (int i = 0; i < ww; ++i) buf.push_back(img.at_clamped(x + i - ax, y + j - ay, c));
        std::sort(buf.begin(), buf.end());
        const std::size_t n = buf.size();
        out.at(x, y, c) = n % 2 ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
      }
  return out;
}

}  // namespace rendition::testing
