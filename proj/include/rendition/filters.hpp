#pragma once

// The operator zoo: pure image-to-image filters used as black boxes.
//
// Boundary handling is replicate padding everywhere. Every filter acts on
// each channel independently. Windows of even extent are anchored so that the
// output pixel is the top-left of the window centre, i.e. offsets run from
// -floor((n-1)/2) to n-1-floor((n-1)/2).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rendition/image.hpp"

namespace rendition {

class FilterParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline int window_anchor(int extent) { return (extent - 1) / 2; }

/// a*b + c, fused when the target has hardware FMA.
inline double madd(double a, double b, double c) {
#if defined(__FMA__)
  return std::fma(a, b, c);
#else
  return a * b + c;
#endif
}

/// exp(-t) for t >= 0, written so the compiler can vectorize it.
/// Relative error is below 2e-16 on [0, 700]; larger t returns 0.
inline double exp_neg(double t) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShifter = 6755399441055744.0;  // 1.5 * 2^52
  // Clamp and cutoff are done on bit patterns: non-negative doubles order
  // like their int64 images, and integer selects vectorize under strict FP.
  constexpr std::int64_t kCutBits = std::bit_cast<std::int64_t>(700.0);
  const std::int64_t tbits = std::bit_cast<std::int64_t>(t);
  const std::int64_t below = (tbits - kCutBits) >> 63;  // all ones iff t < 700
  const double tc = std::bit_cast<double>(std::min(tbits, kCutBits));
  const double z = -tc * kLog2e;
  const double shifted = z + kShifter;
  const double n = shifted - kShifter;  // round-to-nearest(z)
  const double r = (-tc - n * kLn2Hi) - n * kLn2Lo;  // |r| <= ln2/2
  // Taylor series of e^r to degree 12.
  double p = 1.0 / 479001600.0;
  p = madd(p, r, 1.0 / 39916800.0);
  p = madd(p, r, 1.0 / 3628800.0);
  p = madd(p, r, 1.0 / 362880.0);
  p = madd(p, r, 1.0 / 40320.0);
  p = madd(p, r, 1.0 / 5040.0);
  p = madd(p, r, 1.0 / 720.0);
  p = madd(p, r, 1.0 / 120.0);
  p = madd(p, r, 1.0 / 24.0);
  p = madd(p, r, 1.0 / 6.0);
  p = madd(p, r, 0.5);
  p = madd(p, r, 1.0);
  p = madd(p, r, 1.0);
  // shifted and kShifter share an exponent, so their bit patterns differ by n.
  const std::int64_t ni = std::bit_cast<std::int64_t>(shifted) - std::bit_cast<std::int64_t>(kShifter);
  const double scaled = p * std::bit_cast<double>((ni + 1023) << 52);
  return std::bit_cast<double>(std::bit_cast<std::int64_t>(scaled) & below);
}

/// Copy of a single-channel plane with `pad` replicated pixels on each side.
struct PaddedPlane {
  PaddedPlane(const Image& plane, int pad_x, int pad_y)
      : px(pad_x), py(pad_y), stride(plane.width() + 2 * pad_x),
        data(static_cast<std::size_t>(stride) * (plane.height() + 2 * pad_y)) {
    for (int y = -py; y < plane.height() + py; ++y) {
      double* row = &data[static_cast<std::size_t>(y + py) * stride];
      for (int x = -px; x < plane.width() + px; ++x) row[x + px] = plane.at_clamped(x, y);
    }
  }
  /// Pointer to padded sample at original coordinates (x, y).
  [[nodiscard]] const double* at(int x, int y) const {
    return &data[static_cast<std::size_t>(y + py) * stride + (x + px)];
  }
  int px, py, stride;
  std::vector<double> data;
};

inline Image correlate_plane(const Image& plane, const std::vector<double>& kernel, int kw,
                             int kh) {
  const int ax = window_anchor(kw);
  const int ay = window_anchor(kh);
  const PaddedPlane pad(plane, std::max(ax, kw - 1 - ax), std::max(ay, kh - 1 - ay));
  Image out(plane.shape());
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < kh; ++j) {
        const double* row = pad.at(x - ax, y + j - ay);
        const double* k = &kernel[static_cast<std::size_t>(j) * kw];
        for (int i = 0; i < kw; ++i) acc += k[i] * row[i];
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline Image correlate_rows(const Image& plane, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int a = window_anchor(n);
  const PaddedPlane pad(plane, std::max(a, n - 1 - a), 0);
  Image out(plane.shape());
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      const double* row = pad.at(x - a, y);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * row[i];
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline Image correlate_cols(const Image& plane, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int a = window_anchor(n);
  const PaddedPlane pad(plane, 0, std::max(a, n - 1 - a));
  Image out(plane.shape());
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += k[j] * *pad.at(x, y + j - a);
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline void require_fits(const Image& img, int kw, int kh, const char* what) {
  if (kw > img.width() || kh > img.height()) {
    throw FilterParameterError(std::string(what) + ": window " + std::to_string(kw) + "x" +
                               std::to_string(kh) + " exceeds image " + to_string(img.shape()));
  }
}

}  // namespace detail

/// 1-D Gaussian taps centred on the kernel centroid (half-integer offsets
/// for even sizes), normalized to unit sum.
inline std::vector<double> gaussian_taps(int size, double sigma) {
  if (size < 1) throw FilterParameterError("gaussian size must be >= 1");
  if (!(sigma > 0.0)) throw FilterParameterError("gaussian sigma must be > 0");
  std::vector<double> taps(size);
  const double centre = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double u = i - centre;
    taps[i] = std::exp(-(u * u) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

/// size x size Gaussian stencil, row-major. Equals the outer product of
/// gaussian_taps with itself.
inline std::vector<double> gaussian_kernel(int size, double sigma) {
  const auto t = gaussian_taps(size, sigma);
  std::vector<double> k(static_cast<std::size_t>(size) * size);
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) k[static_cast<std::size_t>(j) * size + i] = t[j] * t[i];
  return k;
}

inline Image gaussian_blur(const Image& img, int size, double sigma) {
  const auto taps = gaussian_taps(size, sigma);
  detail::require_fits(img, size, size, "gaussian_blur");
  return per_channel(img, [&](const Image& p) {
    return detail::correlate_cols(detail::correlate_rows(p, taps), taps);
  });
}

/// Normalized indicator of a disk rasterized on a diameter x diameter grid:
/// a cell is included iff its centre lies within radius diameter/2.
inline std::vector<double> disk_kernel(int diameter) {
  if (diameter < 1) throw FilterParameterError("disk diameter must be >= 1");
  const double centre = (diameter - 1) / 2.0;
  const double r2 = (diameter / 2.0) * (diameter / 2.0);
  std::vector<double> k(static_cast<std::size_t>(diameter) * diameter, 0.0);
  double count = 0.0;
  for (int j = 0; j < diameter; ++j) {
    for (int i = 0; i < diameter; ++i) {
      const double u = i - centre, v = j - centre;
      if (u * u + v * v <= r2) {
        k[static_cast<std::size_t>(j) * diameter + i] = 1.0;
        count += 1.0;
      }
    }
  }
  for (double& w : k) w /= count;
  return k;
}

inline Image disk_blur(const Image& img, int diameter) {
  const auto k = disk_kernel(diameter);
  detail::require_fits(img, diameter, diameter, "disk_blur");
  return per_channel(img, [&](const Image& p) {
    return detail::correlate_plane(p, k, diameter, diameter);
  });
}

/// Spatial window radius used by the bilateral filter.
inline int bilateral_radius(double sigma_s) { return static_cast<int>(std::ceil(3.0 * sigma_s)); }

/// Direct (brute-force) bilateral filter over a (2R+1)^2 window,
/// R = ceil(3*sigma_s).
///
/// The weight between two pixels is symmetric, so each in-image pair is
/// evaluated once and credited to both ends. Pairs whose far end lies in the
/// replicate padding are evaluated separately.
inline Image bilateral(const Image& img, double sigma_s, double sigma_r) {
  if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) {
    throw FilterParameterError("bilateral sigmas must be > 0");
  }
  const int radius = bilateral_radius(sigma_s);
  const int span = 2 * radius + 1;
  const auto spatial = gaussian_kernel(span, sigma_s);
  const double range_scale = 1.0 / (2.0 * sigma_r * sigma_r);
  auto spatial_at = [&](int dx, int dy) {
    return spatial[static_cast<std::size_t>(dy + radius) * span + (dx + radius)];
  };

  return per_channel(img, [&](const Image& plane) {
    const detail::PaddedPlane pad(plane, radius, radius);
    const int width = plane.width();
    const int height = plane.height();
    const double s0 = spatial_at(0, 0);
    std::vector<double> num(plane.size()), den(plane.size()), wbuf(width);
    for (int y = 0; y < height; ++y) {
      const double* c = pad.at(0, y);
      for (int x = 0; x < width; ++x) {
        num[static_cast<std::size_t>(y) * width + x] = s0 * c[x];
        den[static_cast<std::size_t>(y) * width + x] = s0;
      }
    }
    // Half window: dy > 0, or dy == 0 and dx > 0.
    for (int dy = 0; dy <= radius; ++dy) {
      for (int dx = (dy == 0 ? 1 : -radius); dx <= radius; ++dx) {
        const double sw = spatial_at(dx, dy);
        for (int y = 0; y < height; ++y) {
          const double* __restrict centre = pad.at(0, y);
          const double* __restrict src = pad.at(dx, y + dy);
          double* __restrict nrow = &num[static_cast<std::size_t>(y) * width];
          double* __restrict drow = &den[static_cast<std::size_t>(y) * width];
          double* __restrict w = wbuf.data();
          for (int x = 0; x < width; ++x) {
            const double d = src[x] - centre[x];
            w[x] = sw * detail::exp_neg(d * d * range_scale);
            nrow[x] += w[x] * src[x];
            drow[x] += w[x];
          }
          // Credit the partner pixel (x + dx, y + dy) when it is in the image.
          if (y + dy < height) {
            const int lo = std::max(0, -dx);
            const int hi = std::min(width, width - dx);
            double* __restrict pn = &num[static_cast<std::size_t>(y + dy) * width + dx];
            double* __restrict pd = &den[static_cast<std::size_t>(y + dy) * width + dx];
            for (int x = lo; x < hi; ++x) {
              pn[x] += w[x] * centre[x];
              pd[x] += w[x];
            }
          }
        }
        // Mirror offset (-dx, -dy) for pixels whose neighbour is padding.
        auto mirror = [&](int y, int x0, int x1) {
          const double* centre = pad.at(0, y);
          const double* src = pad.at(-dx, y - dy);
          double* nrow = &num[static_cast<std::size_t>(y) * width];
          double* drow = &den[static_cast<std::size_t>(y) * width];
          for (int x = x0; x < x1; ++x) {
            const double d = src[x] - centre[x];
            const double w = sw * detail::exp_neg(d * d * range_scale);
            nrow[x] += w * src[x];
            drow[x] += w;
          }
        };
        for (int y = 0; y < height; ++y) {
          if (y - dy < 0) {
            mirror(y, 0, width);
          } else if (dx > 0) {
            mirror(y, 0, std::min(dx, width));
          } else if (dx < 0) {
            mirror(y, std::max(0, width + dx), width);
          }
        }
      }
    }
    Image out(plane.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = num[i] / den[i];
    return out;
  });
}

/// Median over a height x width replicate-padded window; for an even count
/// the two middle order statistics are averaged.
inline Image median_filter(const Image& img, int window_h, int window_w) {
  if (window_h < 1 || window_w < 1) throw FilterParameterError("median window must be >= 1");
  detail::require_fits(img, window_w, window_h, "median_filter");
  const int ax = detail::window_anchor(window_w);
  const int ay = detail::window_anchor(window_h);
  const std::size_t n = static_cast<std::size_t>(window_h) * window_w;
  return per_channel(img, [&](const Image& plane) {
    const detail::PaddedPlane pad(plane, std::max(ax, window_w - 1 - ax),
                                  std::max(ay, window_h - 1 - ay));
    Image out(plane.shape());
    std::vector<double> buf(n);
    for (int y = 0; y < plane.height(); ++y) {
      for (int x = 0; x < plane.width(); ++x) {
        std::size_t k = 0;
        for (int j = 0; j < window_h; ++j) {
          const double* row = pad.at(x - ax, y + j - ay);
          for (int i = 0; i < window_w; ++i) buf[k++] = row[i];
        }
        const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
        std::nth_element(buf.begin(), mid, buf.end());
        double m = *mid;
        if (n % 2 == 0) m = 0.5 * (m + *std::max_element(buf.begin(), mid));
        out.at(x, y) = m;
      }
    }
    return out;
  });
}

/// Pointwise x^g on samples clamped to [0,1].
inline Image gamma_map(const Image& img, double g) {
  if (!(g > 0.0)) throw FilterParameterError("gamma exponent must be > 0");
  Image out(img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = std::pow(std::clamp(img[i], 0.0, 1.0), g);
  return out;
}

/// S-curve that fixes 0, 0.5 and 1; smaller `a` gives a steeper midtone.
inline double sigmoid_tone_value(double x, double a) {
  const double half = std::atan(1.0 / (2.0 * a));
  return (half + std::atan((std::clamp(x, 0.0, 1.0) - 0.5) / a)) / (2.0 * half);
}

inline Image sigmoid_tone(const Image& img, double a) {
  if (!(a > 0.0)) throw FilterParameterError("sigmoid slope a must be > 0");
  Image out(img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = sigmoid_tone_value(img[i], a);
  return out;
}

/// Soft floor quantization onto {0, 1/L, ..., (L-1)/L}, L = levels: a sum of
/// L-1 tanh steps of height 1/L centred on the bin edges k/L, offset so that
/// 0 maps to 0 exactly. Tends to floor(L x) / L as sharpness grows. Input is
/// clamped to [0,1].
inline double posterize_value(double x, int levels, double sharpness) {
  const double v = std::clamp(x, 0.0, 1.0);
  double out = 0.0;
  for (int k = 1; k < levels; ++k) {
    const double edge = static_cast<double>(k) / levels;
    out += std::tanh(sharpness * (v - edge)) - std::tanh(-sharpness * edge);
  }
  return 0.5 * out / levels;
}

inline Image posterize(const Image& img, int levels, double sharpness) {
  if (levels < 2) throw FilterParameterError("posterize needs >= 2 levels");
  if (!(sharpness > 0.0)) throw FilterParameterError("posterize sharpness must be > 0");
  Image out(img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = posterize_value(img[i], levels, sharpness);
  return out;
}

enum class ResampleMethod { bilinear, bicubic };

inline std::string to_string(ResampleMethod m) {
  return m == ResampleMethod::bilinear ? "bilinear" : "bicubic";
}

namespace detail {

inline double resample_kernel(ResampleMethod m, double x) {
  x = std::abs(x);
  if (m == ResampleMethod::bilinear) return x < 1.0 ? 1.0 - x : 0.0;
  // Keys cubic convolution, a = -0.5.
  if (x <= 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
  if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
  return 0.0;
}

struct ResampleWeights {
  std::vector<std::vector<int>> index;
  std::vector<std::vector<double>> weight;
};

/// Pixel-centre-aligned resampling weights from `in_len` to `out_len`
/// samples. When shrinking, the kernel is stretched by the scale factor to
/// antialias. Out-of-range taps are clamped (replicate boundary).
inline ResampleWeights resample_weights(int in_len, int out_len, ResampleMethod m) {
  const double scale = static_cast<double>(out_len) / in_len;
  const double stretch = scale < 1.0 ? scale : 1.0;
  const double support = (m == ResampleMethod::bilinear ? 1.0 : 2.0) / stretch;
  ResampleWeights w;
  w.index.resize(out_len);
  w.weight.resize(out_len);
  for (int i = 0; i < out_len; ++i) {
    const double u = (i + 0.5) / scale - 0.5;
    const int lo = static_cast<int>(std::floor(u - support));
    const int hi = static_cast<int>(std::ceil(u + support));
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double k = resample_kernel(m, (u - j) * stretch);
      if (k == 0.0) continue;
      w.index[i].push_back(std::clamp(j, 0, in_len - 1));
      w.weight[i].push_back(k);
      sum += k;
    }
    for (double& k : w.weight[i]) k /= sum;
  }
  return w;
}

inline Image resize_plane(const Image& plane, int out_w, int out_h, ResampleMethod m) {
  const auto wx = resample_weights(plane.width(), out_w, m);
  const auto wy = resample_weights(plane.height(), out_h, m);
  Image tmp(Shape{out_w, plane.height(), 1});
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < wx.index[x].size(); ++t)
        acc += wx.weight[x][t] * plane.at(wx.index[x][t], y);
      tmp.at(x, y) = acc;
    }
  }
  Image out(Shape{out_w, out_h, 1});
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < wy.index[y].size(); ++t)
        acc += wy.weight[y][t] * tmp.at(x, wy.index[y][t]);
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Downscale by 1/q and upscale back by q.
inline Image resample_cycle(const Image& img, int q, ResampleMethod method) {
  if (q < 2) throw FilterParameterError("resample factor q must be >= 2");
  if (img.width() % q != 0 || img.height() % q != 0) {
    throw FilterParameterError("resample_cycle: image " + to_string(img.shape()) +
                               " not divisible by q=" + std::to_string(q));
  }
  return per_channel(img, [&](const Image& p) {
    const Image small = detail::resize_plane(p, p.width() / q, p.height() / q, method);
    return detail::resize_plane(small, p.width(), p.height(), method);
  });
}

namespace detail {

struct Dct8 {
  double c[8][8];
  Dct8() {
    for (int k = 0; k < 8; ++k) {
      const double norm = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) c[k][n] = norm * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
    }
  }
};

inline const Dct8& dct8() {
  static const Dct8 table;
  return table;
}

}  // namespace detail

/// Blockwise 8x8 orthonormal DCT, uniform dead-zone quantization of the
/// coefficients with step 1/q (truncation toward zero, i.e. shrink then
/// quantize, so |Q(c)| <= |c|), inverse DCT.
inline Image dct_quantize(const Image& img, double q) {
  if (!(q > 0.0)) throw FilterParameterError("dct quantization factor q must be > 0");
  if (img.width() % 8 != 0 || img.height() % 8 != 0) {
    throw FilterParameterError("dct_quantize: image " + to_string(img.shape()) +
                               " not divisible by 8");
  }
  const auto& C = detail::dct8().c;
  const double step = 1.0 / q;
  return per_channel(img, [&](const Image& plane) {
    Image out(plane.shape());
    double block[8][8], tmp[8][8], coef[8][8];
    for (int by = 0; by < plane.height(); by += 8) {
      for (int bx = 0; bx < plane.width(); bx += 8) {
        for (int j = 0; j < 8; ++j)
          for (int i = 0; i < 8; ++i) block[j][i] = plane.at(bx + i, by + j);
        // coef = C * block * C^T
        for (int k = 0; k < 8; ++k)
          for (int i = 0; i < 8; ++i) {
            double acc = 0.0;
            for (int n = 0; n < 8; ++n) acc += C[k][n] * block[n][i];
            tmp[k][i] = acc;
          }
        for (int k = 0; k < 8; ++k)
          for (int l = 0; l < 8; ++l) {
            double acc = 0.0;
            for (int n = 0; n < 8; ++n) acc += tmp[k][n] * C[l][n];
            coef[k][l] = step * std::trunc(acc / step);
          }
        // block = C^T * coef * C
        for (int n = 0; n < 8; ++n)
          for (int l = 0; l < 8; ++l) {
            double acc = 0.0;
            for (int k = 0; k < 8; ++k) acc += C[k][n] * coef[k][l];
            tmp[n][l] = acc;
          }
        for (int n = 0; n < 8; ++n)
          for (int m = 0; m < 8; ++m) {
            double acc = 0.0;
            for (int l = 0; l < 8; ++l) acc += tmp[n][l] * C[l][m];
            out.at(bx + m, by + n) = acc;
          }
      }
    }
    return out;
  });
}

}  // namespace rendition
