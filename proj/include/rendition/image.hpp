#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rendition {

/// Thrown when two images (or an image and a shape) disagree in size.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shape {
  int width = 0;
  int height = 0;
  int channels = 1;

  [[nodiscard]] std::size_t pixels() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] std::size_t samples() const {
    return pixels() * static_cast<std::size_t>(channels);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  std::string out = std::to_string(s.width) + "x" + std::to_string(s.height);
  if (s.channels != 1) out += "x" + std::to_string(s.channels);
  return out;
}

/// Row-major, channel-interleaved image of double samples.
///
/// Samples nominally live in [0,1] but are allowed to leave that range while a
/// solver iterates; only file export clamps. Every library routine returns
/// a new Image rather than mutating its argument.
class Image {
 public:
  Image() = default;

  explicit Image(Shape shape, double fill = 0.0)
      : shape_(validated(shape)), data_(shape_.samples(), fill) {}

  Image(Shape shape, std::vector<double> data) : shape_(validated(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.samples()) {
      throw DimensionError("image data length " + std::to_string(data_.size()) +
                           " does not match shape " + to_string(shape_));
    }
  }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] int width() const { return shape_.width; }
  [[nodiscard]] int height() const { return shape_.height; }
  [[nodiscard]] int channels() const { return shape_.channels; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<const double> samples() const { return data_; }
  [[nodiscard]] std::span<double> samples() { return data_; }
  [[nodiscard]] const std::vector<double>& vector() const { return data_; }

  [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
  [[nodiscard]] double& operator[](std::size_t i) { return data_[i]; }

  [[nodiscard]] std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(shape_.channels) +
           static_cast<std::size_t>(c);
  }
  [[nodiscard]] double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  [[nodiscard]] double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

  /// Sample with replicate (clamp-to-edge) boundary handling.
  [[nodiscard]] double at_clamped(int x, int y, int c = 0) const {
    x = std::clamp(x, 0, shape_.width - 1);
    y = std::clamp(y, 0, shape_.height - 1);
    return data_[index(x, y, c)];
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static Shape validated(Shape s) {
    if (s.width <= 0 || s.height <= 0) {
      throw DimensionError("image dimensions must be positive, got " + to_string(s));
    }
    if (s.channels != 1 && s.channels != 3) {
      throw DimensionError("image must have 1 or 3 channels, got " + std::to_string(s.channels));
    }
    return s;
  }

  Shape shape_{};
  std::vector<double> data_;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

// Element-wise helpers. These are the only arithmetic the solver needs, so
// they are kept as plain loops over the flat sample vector.

/// a*x + b*y
inline Image lincomb(double a, const Image& x, double b, const Image& y) {
  require_same_shape(x, y, "lincomb");
  Image out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

inline Image operator+(const Image& x, const Image& y) {
  require_same_shape(x, y, "operator+");
  Image out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

inline Image operator-(const Image& x, const Image& y) {
  require_same_shape(x, y, "operator-");
  Image out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

inline Image operator*(double s, const Image& x) {
  Image out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
  return out;
}

inline double dot(const Image& x, const Image& y) {
  require_same_shape(x, y, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

inline double l2_norm(const Image& x) {
  double acc = 0.0;
  for (double v : x.samples()) acc += v * v;
  return std::sqrt(acc);
}

inline double max_abs(const Image& x) {
  double m = 0.0;
  for (double v : x.samples()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const Image& x, const Image& y) {
  require_same_shape(x, y, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

inline bool all_finite(const Image& x) {
  return std::all_of(x.samples().begin(), x.samples().end(),
                     [](double v) { return std::isfinite(v); });
}

inline Image clamp01(const Image& x) {
  Image out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], 0.0, 1.0);
  return out;
}

/// Split into single-channel planes and back. Operators that act per channel
/// use these so each filter only has to handle grayscale.
inline std::vector<Image> split_channels(const Image& img) {
  const int nc = img.channels();
  if (nc == 1) return {img};
  std::vector<Image> planes(nc, Image(Shape{img.width(), img.height(), 1}));
  for (std::size_t p = 0; p < img.shape().pixels(); ++p) {
    for (int c = 0; c < nc; ++c) planes[c][p] = img[p * nc + c];
  }
  return planes;
}

inline Image merge_channels(const std::vector<Image>& planes) {
  if (planes.size() == 1) return planes.front();
  const Shape s = planes.front().shape();
  const int nc = static_cast<int>(planes.size());
  Image out(Shape{s.width, s.height, nc});
  for (std::size_t p = 0; p < s.pixels(); ++p) {
    for (int c = 0; c < nc; ++c) out[p * nc + c] = planes[c][p];
  }
  return out;
}

template <typename PlaneFn>
Image per_channel(const Image& img, PlaneFn&& fn) {
  if (img.channels() == 1) return fn(img);
  auto planes = split_channels(img);
  for (auto& p : planes) p = fn(p);
  return merge_channels(planes);
}

}  // namespace rendition
