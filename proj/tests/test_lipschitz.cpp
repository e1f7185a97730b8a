#include <gtest/gtest.h>

#include "rendition/lipschitz.hpp"
#include "rendition/operator_spec.hpp"
#include "support.hpp"

using namespace rendition;
using rendition::testing::random_image;

namespace {

ProbeConfig small_probe(int n = 20, std::uint64_t seed = 99) {
  ProbeConfig cfg;
  cfg.n_samples = n;
  cfg.seed = seed;
  cfg.shape = Shape{32, 32, 1};
  return cfg;
}

BlackBoxOperator square_operator() {
  return BlackBoxOperator("square", [](const Image& x) {
    Image y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i];
    return y;
  });
}

}  // namespace

TEST(Lipschitz, IdentityIsExactlyOne) {
  const auto est = estimate_lipschitz(identity_operator(), small_probe());
  EXPECT_EQ(est.m_hat, 1.0);
  for (double r : est.ratios) EXPECT_EQ(r, 1.0);
}

TEST(Lipschitz, ScalingExample) {
  EXPECT_NEAR(estimate_lipschitz(scaling_operator(0.5), small_probe()).m_hat, 0.5, 1e-15);
}

TEST(Lipschitz, ExactActivationCount) {
  const auto f = make_gaussian_blur(3, 1.0);
  (void)estimate_lipschitz(f, small_probe(17));
  EXPECT_EQ(f.activations(), 34u);
}

TEST(Lipschitz, DeterministicForSameConfig) {
  const auto f = build_operator("bilat:ss=1,sr=0.3");
  const auto a = estimate_lipschitz(f, small_probe(10, 5));
  const auto b = estimate_lipschitz(f, small_probe(10, 5));
  EXPECT_EQ(a.m_hat, b.m_hat);
  EXPECT_EQ(a.ratios, b.ratios);
  EXPECT_EQ(a.argmax_index, b.argmax_index);
  const auto c = estimate_lipschitz(f, small_probe(10, 6));
  EXPECT_NE(a.ratios, c.ratios);
}

TEST(Lipschitz, SamplesAreReplayable) {
  const auto f = build_operator("median:h=3,w=3");
  const auto cfg = small_probe(8, 123);
  const auto est = estimate_lipschitz(f, cfg);
  const auto [x, d] = lipschitz_probe_pair(cfg.shape, cfg.seed, est.argmax_index);
  const Image xd = x + d;
  EXPECT_EQ(l2_norm(f(xd) - f(x)) / l2_norm(xd - x), est.m_hat);
}

TEST(Lipschitz, HomogeneousUnderOutputScaling) {
  for (const char* text : {"gauss:size=5,sigma=1", "median:h=3,w=3", "sigmoid:a=0.25",
                           "unsharp:base=[gauss:size=5,sigma=2],alpha=1"}) {
    const auto f = build_operator(text);
    const auto base = estimate_lipschitz(f, small_probe(12));
    for (double c : {2.0, -0.5, 0.25, -4.0}) {
      const BlackBoxOperator g("scaled", [f, c](const Image& x) { return c * f(x); });
      const auto scaled = estimate_lipschitz(g, small_probe(12));
      // Exact for powers of two; relative rounding otherwise.
      EXPECT_NEAR(scaled.m_hat, std::abs(c) * base.m_hat, 1e-14 * base.m_hat) << text << " c=" << c;
      EXPECT_EQ(scaled.argmax_index, base.argmax_index);
    }
  }
}

TEST(Lipschitz, SmoothersBelowOneSharpenersAbove) {
  const auto cfg = small_probe(30);
  for (const char* text : {"gauss:size=5,sigma=1", "gauss:size=15,sigma=5", "disk:d=7",
                           "bilat:ss=2,sr=1.5", "bilat:ss=2,sr=0.2", "resample:q=2",
                           "resample:q=4,method=bilinear"}) {
    EXPECT_LE(estimate_lipschitz(build_operator(text), cfg).m_hat, 1.02) << text;
  }
  for (const char* text : {"unsharp:base=[gauss:size=5,sigma=1],alpha=0.5",
                           "unsharp:base=[gauss:size=15,sigma=5],alpha=1",
                           "unsharp:base=[bilat:ss=2,sr=1.5],alpha=1"}) {
    EXPECT_GE(estimate_lipschitz(build_operator(text), cfg).m_hat, 0.98) << text;
  }
}

TEST(Lipschitz, RejectsBadConfig) {
  ProbeConfig cfg;
  cfg.n_samples = 0;
  EXPECT_THROW(estimate_lipschitz(identity_operator(), cfg), std::invalid_argument);
}

TEST(DirectionalDerivative, LinearOperatorExact) {
  const Image x = random_image(Shape{8, 8, 1}, 1);
  const Image d = random_image(Shape{8, 8, 1}, 2);
  const Image got = directional_derivative(scaling_operator(3.0), x, d, 0.5);
  EXPECT_LE(max_abs_diff(got, 3.0 * d), 1e-14);
  const Image w = directional_derivative(make_gaussian_blur(3, 1.0), x, d, 1e-3);
  EXPECT_LE(max_abs_diff(w, gaussian_blur(d, 3, 1.0)), 1e-11);
}

TEST(DirectionalDerivative, RadialEqualsDirectionalAlongX) {
  const auto f = build_operator("bilat:ss=1,sr=0.4");
  const Image x = random_image(Shape{10, 10, 1}, 3);
  EXPECT_EQ(radial_derivative(f, x, 1e-3), directional_derivative(f, x, x, 1e-3));
}

TEST(DirectionalDerivative, FirstOrderConvergence) {
  // f(x) = x^2: (f(x+eps d) - f(x))/eps - 2 x d = eps d^2, so the error
  // halves exactly with eps (up to rounding).
  const auto f = square_operator();
  const Image x = random_image(Shape{16, 16, 1}, 4);
  const Image d = random_image(Shape{16, 16, 1}, 5);
  Image analytic(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) analytic[i] = 2.0 * x[i] * d[i];
  double previous = 0.0;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    const double err = l2_norm(directional_derivative(f, x, d, eps) - analytic);
    if (previous > 0.0) {
      EXPECT_NEAR(err / previous, 0.5, 1e-6);
    }
    previous = err;
  }
}

TEST(DirectionalDerivative, TwoActivations) {
  const auto f = square_operator();
  const Image x(Shape{4, 4, 1}, 0.5);
  (void)directional_derivative(f, x, x, 1e-2);
  EXPECT_EQ(f.activations(), 2u);
  EXPECT_THROW(directional_derivative(f, x, x, 0.0), std::invalid_argument);
}

TEST(NullCheck, Examples) {
  const Shape s{16, 16, 1};
  EXPECT_EQ(check_null_preservation(make_gaussian_blur(5, 1.0), s), 0.0);
  EXPECT_LE(check_null_preservation(make_sigmoid_tone(0.2), s), 1e-15);
  const BlackBoxOperator offset("offset", [](const Image& x) {
    Image y = x;
    for (double& v : y.samples()) v += 0.1;
    return y;
  });
  EXPECT_DOUBLE_EQ(check_null_preservation(offset, s), 0.1);
}
