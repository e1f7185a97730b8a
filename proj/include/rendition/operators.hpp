#pragma once

// BlackBoxOperator factories for every filter family in the zoo.

#include <string>
#include <vector>

#include "rendition/black_box.hpp"
#include "rendition/filters.hpp"

namespace rendition {

/// x + alpha * (x - base(x)); one activation of `base`.
inline Image unsharp(const Image& x, const BlackBoxOperator& base, double alpha) {
  const Image smooth = base(x);
  return lincomb(1.0 + alpha, x, -alpha, smooth);
}

inline BlackBoxOperator make_gaussian_blur(int size, double sigma) {
  (void)gaussian_taps(size, sigma);  // validate eagerly
  return BlackBoxOperator("gauss(" + std::to_string(size) + "," + std::to_string(sigma) + ")",
                          [=](const Image& x) { return gaussian_blur(x, size, sigma); });
}

inline BlackBoxOperator make_disk_blur(int diameter) {
  (void)disk_kernel(diameter);
  return BlackBoxOperator("disk(" + std::to_string(diameter) + ")",
                          [=](const Image& x) { return disk_blur(x, diameter); });
}

inline BlackBoxOperator make_bilateral(double sigma_s, double sigma_r) {
  if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) {
    throw FilterParameterError("bilateral sigmas must be > 0");
  }
  return BlackBoxOperator(
      "bilat(" + std::to_string(sigma_s) + "," + std::to_string(sigma_r) + ")",
      [=](const Image& x) { return bilateral(x, sigma_s, sigma_r); });
}

inline BlackBoxOperator make_median(int window_h, int window_w) {
  if (window_h < 1 || window_w < 1) throw FilterParameterError("median window must be >= 1");
  return BlackBoxOperator(
      "median(" + std::to_string(window_h) + "," + std::to_string(window_w) + ")",
      [=](const Image& x) { return median_filter(x, window_h, window_w); });
}

inline BlackBoxOperator make_unsharp(BlackBoxOperator base, double alpha) {
  std::string label = "unsharp(" + base.label() + "," + std::to_string(alpha) + ")";
  return BlackBoxOperator(std::move(label),
                          [base, alpha](const Image& x) { return unsharp(x, base, alpha); });
}

inline BlackBoxOperator make_gamma(double g) {
  if (!(g > 0.0)) throw FilterParameterError("gamma exponent must be > 0");
  return BlackBoxOperator("gamma(" + std::to_string(g) + ")",
                          [=](const Image& x) { return gamma_map(x, g); });
}

inline BlackBoxOperator make_sigmoid_tone(double a) {
  if (!(a > 0.0)) throw FilterParameterError("sigmoid slope a must be > 0");
  return BlackBoxOperator("sigmoid(" + std::to_string(a) + ")",
                          [=](const Image& x) { return sigmoid_tone(x, a); });
}

inline BlackBoxOperator make_resample_cycle(int q, ResampleMethod method) {
  if (q < 2) throw FilterParameterError("resample factor q must be >= 2");
  return BlackBoxOperator("resample(" + std::to_string(q) + "," + to_string(method) + ")",
                          [=](const Image& x) { return resample_cycle(x, q, method); });
}

inline BlackBoxOperator make_dct_quantize(double q) {
  if (!(q > 0.0)) throw FilterParameterError("dct quantization factor q must be > 0");
  return BlackBoxOperator("dct(" + std::to_string(q) + ")",
                          [=](const Image& x) { return dct_quantize(x, q); });
}

inline BlackBoxOperator make_posterize(int levels, double sharpness) {
  if (levels < 2) throw FilterParameterError("posterize needs >= 2 levels");
  if (!(sharpness > 0.0)) throw FilterParameterError("posterize sharpness must be > 0");
  return BlackBoxOperator(
      "posterize(" + std::to_string(levels) + "," + std::to_string(sharpness) + ")",
      [=](const Image& x) { return posterize(x, levels, sharpness); });
}

/// `base` applied `times` times in a row.
inline BlackBoxOperator make_repeat(BlackBoxOperator base, int times) {
  if (times < 1) throw FilterParameterError("repeat count must be >= 1");
  std::string label = "repeat(" + base.label() + "," + std::to_string(times) + ")";
  return BlackBoxOperator(std::move(label), [base, times](const Image& x) {
    Image y = x;
    for (int i = 0; i < times; ++i) y = base(y);
    return y;
  });
}

}  // namespace rendition
