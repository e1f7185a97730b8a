#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "rendition/image_io.hpp"
#include "rendition/metrics.hpp"
#include "rendition/noise.hpp"
#include "rendition/test_image.hpp"
#include "support.hpp"

using namespace rendition;
using rendition::testing::for_cases;
using rendition::testing::random_image;
using rendition::testing::random_shape;
using rendition::testing::temp_path;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

double sample_std(const Image& img) {
  const double n = static_cast<double>(img.size());
  const double mean = std::accumulate(img.samples().begin(), img.samples().end(), 0.0) / n;
  double ss = 0.0;
  for (double v : img.samples()) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

TEST(Image, RejectsDegenerateShapes) {
  EXPECT_THROW(Image(Shape{0, 4, 1}), DimensionError);
  EXPECT_THROW(Image(Shape{4, 4, 2}), DimensionError);
  EXPECT_THROW(Image(Shape{2, 2, 1}, std::vector<double>(3)), DimensionError);
}

TEST(Image, ArithmeticMismatchThrows) {
  EXPECT_THROW(Image(Shape{2, 2, 1}) + Image(Shape{2, 3, 1}), DimensionError);
}

TEST(Image, InterleavedIndexing) {
  Image img(Shape{3, 2, 3});
  img.at(2, 1, 1) = 0.5;
  EXPECT_EQ(img[(1 * 3 + 2) * 3 + 1], 0.5);
  EXPECT_EQ(img.at_clamped(9, 9, 1), 0.5);
}

TEST(Image, SplitMergeRoundTrip) {
  const Image img = random_image(Shape{5, 4, 3}, 11);
  EXPECT_EQ(merge_channels(split_channels(img)), img);
}

TEST(ImageIO, EightBitExample) {
  const auto p = temp_path("tiny8.pgm");
  write_bytes(p, std::string("P5\n# comment\n2 1\n255\n") + '\x00' + '\xff');
  const Image img = load_image(p);
  EXPECT_EQ(img.shape(), (Shape{2, 1, 1}));
  EXPECT_EQ(img[0], 0.0);
  EXPECT_EQ(img[1], 1.0);
}

TEST(ImageIO, SixteenBitBigEndian) {
  const auto p = temp_path("tiny16.pgm");
  write_bytes(p, std::string("P5 1 1 65535\n") + '\x80' + '\x00');
  EXPECT_DOUBLE_EQ(load_image(p)[0], 32768.0 / 65535.0);
}

TEST(ImageIO, SixteenBitRoundTripProperty) {
  for_cases(20, 101, [](int i, std::mt19937_64& rng) {
    const Shape s = random_shape(rng, 1, 40);
    const Image img = random_image(s, rng());
    const auto p = temp_path("rt16_" + std::to_string(i) + (s.channels == 3 ? ".ppm" : ".pgm"));
    save_image(img, p, 16);
    const Image back = load_image(p);
    ASSERT_EQ(back.shape(), s);
    EXPECT_LE(max_abs_diff(back, img), 0.5 / 65535.0 + 1e-15);
  });
}

TEST(ImageIO, EightBitRoundTripIsIdempotent) {
  const Image img = random_image(Shape{17, 9, 3}, 5);
  const auto p = temp_path("rt8.ppm");
  save_image(img, p, 8);
  const Image once = load_image(p);
  EXPECT_LE(max_abs_diff(once, img), 0.5 / 255.0 + 1e-15);
  save_image(once, p, 8);
  EXPECT_EQ(load_image(p), once);
}

TEST(ImageIO, ExportClamps) {
  Image img(Shape{2, 1, 1});
  img[0] = -0.3;
  img[1] = 1.7;
  const auto p = temp_path("clamp.pgm");
  save_image(img, p, 16);
  const Image back = load_image(p);
  EXPECT_EQ(back[0], 0.0);
  EXPECT_EQ(back[1], 1.0);
}

TEST(ImageIO, Errors) {
  EXPECT_THROW(load_image(temp_path("does_not_exist.pgm")), ImageReadError);
  const auto ascii = temp_path("ascii.pgm");
  write_bytes(ascii, "P2\n1 1\n255\n0\n");
  EXPECT_THROW(load_image(ascii), UnsupportedImageError);
  const auto odd = temp_path("maxval.pgm");
  write_bytes(odd, std::string("P5\n1 1\n1023\n") + '\x00' + '\x00');
  EXPECT_THROW(load_image(odd), UnsupportedImageError);
  const auto trunc = temp_path("trunc.pgm");
  write_bytes(trunc, "P5\n4 4\n255\n\x01\x02");
  EXPECT_THROW(load_image(trunc), ImageReadError);
  EXPECT_THROW(save_image(Image(Shape{1, 1, 1}), temp_path("x.pgm"), 12), UnsupportedImageError);
  EXPECT_THROW(save_image(Image(Shape{1, 1, 1}), "/nonexistent_dir/x.pgm"), ImageWriteError);
}

TEST(Metrics, Examples) {
  const Image a(Shape{4, 4, 1}, 0.5);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  const Image b(Shape{4, 4, 1}, 0.6);
  EXPECT_NEAR(mse(a, b), 0.01, 1e-15);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
  EXPECT_THROW(mse(a, Image(Shape{4, 5, 1})), DimensionError);
}

TEST(Metrics, SymmetricAndMonotone) {
  for_cases(30, 7, [](int, std::mt19937_64& rng) {
    const Shape s = random_shape(rng, 1, 24);
    const Image a = random_image(s, rng());
    const Image b = random_image(s, rng());
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    const Image c = a + 2.0 * (b - a);  // twice the error
    EXPECT_LT(psnr(a, c), psnr(a, b));
  });
}

TEST(Noise, ZeroSigmaIsIdentity) {
  const Image img = random_image(Shape{8, 8, 1}, 3);
  EXPECT_EQ(add_noise(img, {0.0, 9}), img);
  EXPECT_THROW(add_noise(img, {-1.0, 9}), std::invalid_argument);
}

TEST(Noise, StdAndDeterminism) {
  const Image flat(Shape{512, 512, 1}, 0.5);
  const Image n1 = add_noise(flat, {0.05, 42});
  const double sd = sample_std(n1);
  EXPECT_GE(sd, 0.049);
  EXPECT_LE(sd, 0.051);
  EXPECT_EQ(add_noise(flat, {0.05, 42}), n1);
}

TEST(Noise, DifferentSeedsUncorrelated) {
  const Image flat(Shape{512, 512, 1}, 0.0);
  const Image a = add_noise(flat, {1.0, 1});
  const Image b = add_noise(flat, {1.0, 2});
  const double rho = dot(a, b) / (l2_norm(a) * l2_norm(b));
  EXPECT_LT(std::abs(rho), 0.01);
}

TEST(TestImage, DeterministicAndInRange) {
  const Image a = procedural_test_image(64, 3);
  EXPECT_EQ(a, procedural_test_image(64, 3));
  EXPECT_EQ(a.shape(), (Shape{64, 64, 3}));
  for (double v : a.samples()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
