#pragma once

// Binary PGM (P5) / PPM (P6) reader and writer, 8 or 16 bits per sample.
// The header maxval selects the bit depth: 255 -> 8, 65535 -> 16.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "rendition/image.hpp"

namespace rendition {

/// File missing, truncated, or not a PNM raster at all.
class ImageReadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A well-formed file whose bit depth or channel layout is not supported.
class UnsupportedImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImageWriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class PnmHeaderReader {
 public:
  PnmHeaderReader(const std::vector<unsigned char>& bytes, std::string path)
      : bytes_(bytes), path_(std::move(path)) {}

  long read_int(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw ImageReadError(path_ + ": malformed PNM header (expected " + field + ")");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw ImageReadError(path_ + ": header value out of range");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ImageReadError(path_ + ": malformed PNM header (missing raster separator)");
    }
    return pos_ + 1;
  }

  std::size_t pos_ = 2;

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string path_;
};

inline int bit_depth_for_maxval(long maxval) {
  if (maxval == 255) return 8;
  if (maxval == 65535) return 16;
  return 0;
}

}  // namespace detail

/// Loads a P5/P6 file. Integer sample v of bit depth b maps to v / (2^b - 1).
inline Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageReadError(path.string() + ": cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw ImageReadError(path.string() + ": not a PNM file");
  }
  int channels = 0;
  if (bytes[1] == '5') {
    channels = 1;
  } else if (bytes[1] == '6') {
    channels = 3;
  } else {
    throw UnsupportedImageError(path.string() + ": unsupported PNM variant P" +
                                std::string(1, static_cast<char>(bytes[1])) +
                                " (only binary P5/P6)");
  }

  detail::PnmHeaderReader header(bytes, path.string());
  const long width = header.read_int("width");
  const long height = header.read_int("height");
  const long maxval = header.read_int("maxval");
  if (width <= 0 || height <= 0) throw ImageReadError(path.string() + ": zero-sized image");
  const int depth = detail::bit_depth_for_maxval(maxval);
  if (depth == 0) {
    throw UnsupportedImageError(path.string() + ": unsupported maxval " + std::to_string(maxval) +
                                " (expected 255 or 65535)");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  const std::size_t bytes_per_sample = depth == 8 ? 1 : 2;
  if (bytes.size() < offset + count * bytes_per_sample) {
    throw ImageReadError(path.string() + ": truncated raster");
  }

  const double scale = 1.0 / static_cast<double>(maxval);
  std::vector<double> data(count);
  const unsigned char* raster = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    unsigned v = depth == 8 ? raster[i]
                            : (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
    data[i] = static_cast<double>(v) * scale;
  }
  return Image(Shape{static_cast<int>(width), static_cast<int>(height), channels},
               std::move(data));
}

/// Quantized integer code for a sample: clamp to [0,1], then round half up.
inline std::uint32_t quantize_sample(double v, int bit_depth) {
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint32_t>(std::floor(c * maxval + 0.5));
}

inline void save_image(const Image& img, const std::filesystem::path& path, int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw UnsupportedImageError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageWriteError(path.string() + ": cannot open for writing");
  const int maxval = bit_depth == 8 ? 255 : 65535;
  out << (img.channels() == 1 ? "P5" : "P6") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << maxval << '\n';
  std::vector<unsigned char> raster;
  raster.reserve(img.size() * (bit_depth / 8));
  for (double v : img.samples()) {
    const std::uint32_t q = quantize_sample(v, bit_depth);
    if (bit_depth == 16) raster.push_back(static_cast<unsigned char>(q >> 8));
    raster.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raster.data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw ImageWriteError(path.string() + ": write failed");
}

}  // namespace rendition
