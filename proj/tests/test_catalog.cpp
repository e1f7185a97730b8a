// Empirical Lipschitz constants of the operator zoo against the published
// catalog values (ranges widened for implementation and sampling variance).
// Probes: 200 pairs, 64x64 grayscale, default seed.

#include <gtest/gtest.h>

#include <cstdio>
#include <map>

#include "rendition/lipschitz.hpp"
#include "rendition/operator_spec.hpp"

using namespace rendition;

namespace {

double m_hat(const std::string& spec) {
  static std::map<std::string, double> cache;
  if (auto it = cache.find(spec); it != cache.end()) return it->second;
  const double m = estimate_lipschitz(build_operator(spec), ProbeConfig{}).m_hat;
  std::printf("  M(%s) = %.4f\n", spec.c_str(), m);
  return cache[spec] = m;
}

void expect_in(const std::string& spec, double lo, double hi) {
  const double m = m_hat(spec);
  EXPECT_GE(m, lo) << spec;
  EXPECT_LE(m, hi) << spec;
}

}  // namespace

TEST(Catalog, Gaussian2x2) { expect_in("gauss:size=2,sigma=1", 0.80, 0.92); }
TEST(Catalog, Gaussian5Sigma3) { expect_in("gauss:size=5,sigma=3", 0.78, 0.87); }
TEST(Catalog, Gaussian15Sigma5) { expect_in("gauss:size=15,sigma=5", 0.77, 0.87); }

TEST(Catalog, DiskFamilyContractive) {
  for (int d : {5, 7, 11, 15}) EXPECT_LT(m_hat("disk:d=" + std::to_string(d)), 1.0) << d;
}

TEST(Catalog, BilateralMild) { expect_in("bilat:ss=2,sr=0.5", 0.90, 1.0); }

TEST(Catalog, Median3x3) { expect_in("median:h=3,w=3", 1.00, 1.20); }
TEST(Catalog, Median7x7) { expect_in("median:h=7,w=7", 1.05, 1.25); }

TEST(Catalog, SigmoidMonotoneInSlope) {
  EXPECT_GT(m_hat("sigmoid:a=0.1"), m_hat("sigmoid:a=0.25"));
  EXPECT_GT(m_hat("sigmoid:a=0.25"), m_hat("sigmoid:a=0.5"));
}

TEST(Catalog, SigmoidValues) {
  expect_in("sigmoid:a=0.1", 1.239 - 0.1, 1.239 + 0.1);
  expect_in("sigmoid:a=0.25", 1.12 - 0.1, 1.12 + 0.1);
  expect_in("sigmoid:a=0.5", 1.049 - 0.1, 1.049 + 0.1);
}

TEST(Catalog, SigmoidHalf) { expect_in("sigmoid:a=0.5", 1.0, 1.1); }

TEST(Catalog, UnsharpVariantsAboveOne) {
  for (const char* spec : {"unsharp:base=[gauss:size=5,sigma=3],alpha=0.5",
                           "unsharp:base=[gauss:size=15,sigma=5],alpha=1",
                           "unsharp:base=[bilat:ss=5,sr=1],alpha=0.4",
                           "unsharp:base=[bilat:ss=10,sr=3],alpha=1"}) {
    EXPECT_GT(m_hat(spec), 0.98) << spec;
  }
}

TEST(Catalog, UnsharpGaussian15) {
  expect_in("unsharp:base=[gauss:size=15,sigma=5],alpha=1", 1.0, 1.15);
}

TEST(Catalog, ResampleBicubic) {
  expect_in("resample:q=2,method=bicubic", 0.78, 0.90);
  EXPECT_LT(m_hat("resample:q=4,method=bicubic"), m_hat("resample:q=2,method=bicubic"));
  EXPECT_LT(m_hat("resample:q=4,method=bilinear"), m_hat("resample:q=2,method=bilinear"));
}

TEST(Catalog, DctContractiveAcrossGrid) {
  for (int q : {4, 8, 16, 32, 64, 128}) expect_in("dct:q=" + std::to_string(q), 0.85, 1.0);
}

TEST(Catalog, Composite) {
  expect_in("compose:[unsharp:base=[bilat:ss=10,sr=3],alpha=1;gamma:g=0.65]", 0.95, 1.15);
}

TEST(Catalog, CompositeSubmultiplicative) {
  const std::vector<std::string> zoo = {
      "gauss:size=5,sigma=1", "median:h=3,w=3", "sigmoid:a=0.25", "bilat:ss=2,sr=0.5",
      "unsharp:base=[gauss:size=5,sigma=3],alpha=0.5", "gamma:g=0.65"};
  for (const auto& f : zoo) {
    for (const auto& g : zoo) {
      const double fg = m_hat("compose:[" + g + ";" + f + "]");
      EXPECT_LE(fg, 1.1 * m_hat(f) * m_hat(g)) << f << " after " << g;
    }
  }
}
