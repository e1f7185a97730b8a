#pragma once

#include <algorithm>
#include <cmath>

#include "rendition/image.hpp"

namespace rendition {

/// PSNR reported for identical images instead of +inf.
inline constexpr double kPsnrCap = 200.0;

/// Mean squared difference over all samples of all channels.
inline double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double psnr_from_mse(double m) {
  if (m <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

/// Peak is fixed at 1.0.
inline double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

}  // namespace rendition
