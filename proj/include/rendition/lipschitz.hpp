#pragma once

// Black-box probes: empirical Lipschitz constant, finite-difference
// directional derivatives, and the null-image check.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rendition/black_box.hpp"
#include "rendition/image.hpp"

namespace rendition {

struct ProbeConfig {
  double epsilon = 1e-2;  // finite-difference scale for the derivative probes
  int n_samples = 200;
  Shape shape{64, 64, 1};
  std::uint64_t seed = 20240229;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("probe epsilon must be > 0");
    if (n_samples < 1) throw std::invalid_argument("probe n_samples must be >= 1");
    (void)Image(shape);  // rejects degenerate shapes
  }
};

struct LipschitzEstimate {
  double m_hat = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  Shape shape{};
  int argmax_index = 0;   // sample index that attained m_hat
  std::vector<double> ratios;  // per-sample ratios, in sample order
};

/// Random probe pair for sample `index`: x and d i.i.d. U[0,1]^N.
/// Each sample has its own generator so any single sample can be replayed.
inline std::pair<Image, Image> lipschitz_probe_pair(const Shape& shape, std::uint64_t seed,
                                                    int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image x(shape), d(shape);
  for (double& v : x.samples()) v = unit(rng);
  for (double& v : d.samples()) v = unit(rng);
  return {std::move(x), std::move(d)};
}

/// m_hat = max_i ||f(x_i + d_i) - f(x_i)|| / ||d_i|| over cfg.n_samples random
/// pairs; exactly 2 * n_samples activations of f. Probe inputs x + d lie in
/// [0,2]^N; pointwise tone operators clamp them.
inline LipschitzEstimate estimate_lipschitz(const BlackBoxOperator& f, const ProbeConfig& cfg) {
  cfg.validate();
  LipschitzEstimate est;
  est.n_samples = cfg.n_samples;
  est.seed = cfg.seed;
  est.shape = cfg.shape;
  est.ratios.resize(static_cast<std::size_t>(cfg.n_samples));
  for (int i = 0; i < cfg.n_samples; ++i) {
    const auto [x, d] = lipschitz_probe_pair(cfg.shape, cfg.seed, i);
    const Image xd = x + d;
    const Image fx = f(x);
    const Image fxd = f(xd);
    // Divide by the step actually taken, (x + d) - x, not d itself; the two
    // differ by rounding and only the former makes identity give exactly 1.
    est.ratios[static_cast<std::size_t>(i)] = l2_norm(fxd - fx) / l2_norm(xd - x);
  }
  // Reduce in index order; ties keep the first index.
  for (int i = 0; i < cfg.n_samples; ++i) {
    if (est.ratios[static_cast<std::size_t>(i)] > est.m_hat) {
      est.m_hat = est.ratios[static_cast<std::size_t>(i)];
      est.argmax_index = i;
    }
  }
  return est;
}

/// (f(x + eps*d) - f(x)) / eps; exactly 2 activations.
inline Image directional_derivative(const BlackBoxOperator& f, const Image& x, const Image& d,
                                    double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  require_same_shape(x, d, "directional_derivative");
  const Image fx = f(x);
  const Image fxd = f(x + epsilon * d);
  return (1.0 / epsilon) * (fxd - fx);
}

/// The d = x special case, (f((1+eps)x) - f(x)) / eps.
inline Image radial_derivative(const BlackBoxOperator& f, const Image& x, double epsilon) {
  return directional_derivative(f, x, x, epsilon);
}

/// ||f(0)||_inf for the zero image of the given shape.
inline double check_null_preservation(const BlackBoxOperator& f, const Shape& shape) {
  return max_abs(f(Image(shape, 0.0)));
}

}  // namespace rendition
