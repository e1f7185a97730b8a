#pragma once

// Rendition: recover x* from y = f(x*) using only forward evaluations of f.
//
// The default (approximate) iteration is
//
//   x_{k+1} = (1 - gamma*mu) x_k - gamma (f(x_k) - y),   x_0 = y,
//
// a damped residual-descent step on the loss x^T (f(x) - y) - x^T x / 2 with
// (grad f - I) x replaced by mu x. Two variants share the stopping logic:
// exact_gradient keeps the grad f(x) x term as a radial finite difference,
// and red adds a regularization-by-denoising pull towards s(x).

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rendition/black_box.hpp"
#include "rendition/image.hpp"
#include "rendition/metrics.hpp"

namespace rendition {

enum class SolverMode { approximate, exact_gradient, red };
enum class StopReason { converged, max_iters, diverged };

inline std::string to_string(SolverMode m) {
  switch (m) {
    case SolverMode::approximate: return "approximate";
    case SolverMode::exact_gradient: return "exact_gradient";
    case SolverMode::red: return "red";
  }
  return "?";
}

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iters: return "max_iters";
    case StopReason::diverged: return "diverged";
  }
  return "?";
}

/// Lower floor applied by derive_mu.
inline constexpr double kMuFloor = 0.01;

/// mu = max(|m_hat - 1|, floor): the smallest damping allowed by the bracket
/// |M - 1| <= mu <= M + 1.
inline double derive_mu(double m_hat, double floor = kMuFloor) {
  if (!(m_hat >= 0.0)) throw std::invalid_argument("m_hat must be >= 0");
  return std::max(std::abs(m_hat - 1.0), floor);
}

/// derive_mu capped at tau. A fixed point satisfies ||f(x) - y|| = mu ||x||,
/// so with x close to y the relative-residual stop is reachable only for
/// mu <= tau. The harness uses this policy.
inline double derive_mu_for_tolerance(double m_hat, double tau, double floor = kMuFloor) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  return std::min(derive_mu(m_hat, floor), tau);
}

/// 2 / (mu + m_hat). Step sizes must stay strictly below this.
inline double max_stable_step(double mu, double m_hat) {
  if (!(mu + m_hat > 0.0)) throw std::invalid_argument("mu + m_hat must be > 0");
  return 2.0 / (mu + m_hat);
}

/// ceil(1 / (gamma * m_hat)); advisory iteration budget.
inline int suggested_iterations(double gamma, double m_hat) {
  if (!(gamma > 0.0) || !(m_hat > 0.0)) {
    throw std::invalid_argument("gamma and m_hat must be > 0");
  }
  return static_cast<int>(std::ceil(1.0 / (gamma * m_hat)));
}

/// exp((1 + M) / M): worst-case amplification of a unit perturbation of the
/// observation after ~1/(gamma M) iterations of the linear-case recursion.
inline double noise_amplification_bound(double m_hat) {
  if (!(m_hat > 0.0)) throw std::invalid_argument("m_hat must be > 0");
  return std::exp((1.0 + m_hat) / m_hat);
}

class SolverConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SolverConfig {
  double gamma = 0.15;
  double mu = kMuFloor;
  double tau = 1e-2;
  int max_iters = 200;
  SolverMode mode = SolverMode::approximate;
  double lambda = 0.0;    // red only
  double epsilon = 1e-3;  // exact_gradient only
  bool record_trajectory = true;
  /// Stop as diverged once the relative residual exceeds this multiple of
  /// its initial value.
  double divergence_factor = 10.0;

  void validate() const {
    if (!(gamma > 0.0)) throw SolverConfigError("gamma must be > 0");
    if (!(mu >= 0.0)) throw SolverConfigError("mu must be >= 0");
    if (!(tau > 0.0 && tau < 1.0)) throw SolverConfigError("tau must lie in (0,1)");
    if (max_iters < 0) throw SolverConfigError("max_iters must be >= 0");
    if (!(lambda >= 0.0)) throw SolverConfigError("lambda must be >= 0");
    if (lambda != 0.0 && mode != SolverMode::red) {
      throw SolverConfigError("lambda must be 0 unless mode = red");
    }
    if (!(epsilon > 0.0)) throw SolverConfigError("epsilon must be > 0");
    if (!(divergence_factor > 1.0)) throw SolverConfigError("divergence_factor must be > 1");
  }

  /// Config whose step size is checked against gamma < 2 / (mu + m_hat).
  static SolverConfig guarded(double gamma, double mu, double m_hat) {
    const double bound = max_stable_step(mu, m_hat);
    if (!(gamma < bound)) {
      throw SolverConfigError("gamma " + std::to_string(gamma) +
                              " violates the stability bound 2/(mu+M) = " +
                              std::to_string(bound));
    }
    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.mu = mu;
    return cfg;
  }
};

struct RenditionResult {
  Image estimate;        // clamp of the minimum-residual iterate
  Image final_iterate;   // last iterate, unclamped
  int iterations_run = 0;
  StopReason stop_reason = StopReason::max_iters;
  double initial_residual = 0.0;  // iterate 0, i.e. x_0 = y
  int best_iteration = 0;
  double best_residual = 0.0;
  std::vector<double> residual_trajectory;  // iterates 1..iterations_run
  std::optional<std::vector<double>> psnr_trajectory;  // same indexing
  std::optional<double> psnr_initial;
  std::optional<double> psnr_best;
  std::optional<double> psnr_final;
  std::uint64_t activations_used = 0;  // black-box evaluations (f and s)
};

/// Thrown when the black box fails mid-run; carries what was computed so far.
class RenditionFailure : public std::runtime_error {
 public:
  RenditionFailure(const std::string& what, RenditionResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const RenditionResult& partial() const { return partial_; }

 private:
  RenditionResult partial_;
};

/// ||f(x) - y|| / ||y||; one activation.
inline double relative_residual(const BlackBoxOperator& f, const Image& x, const Image& y) {
  const double ny = l2_norm(y);
  if (ny == 0.0) throw std::invalid_argument("relative_residual: observation has zero norm");
  return l2_norm(f(x) - y) / ny;
}

/// phi(x) = x^T (f(x) - y) - x^T x / 2, given a precomputed f(x).
inline double rendition_loss(const Image& x, const Image& fx, const Image& y) {
  return dot(x, fx - y) - 0.5 * dot(x, x);
}

namespace detail {

/// Shared iteration driver. `step(x, fx)` returns x_{k+1} from x_k and
/// f(x_k) and reports any extra activations it spent.
template <typename Step>
RenditionResult run_rendition(const BlackBoxOperator& f, const Image& y, const SolverConfig& cfg,
                              const std::optional<Image>& truth, Step&& step) {
  cfg.validate();
  const double ny = l2_norm(y);
  if (ny == 0.0) throw std::invalid_argument("render: observation has zero norm");
  if (truth) require_same_shape(y, *truth, "render ground truth");

  RenditionResult res;
  auto quality = [&](const Image& x) { return psnr(clamp01(x), *truth); };
  if (truth) {
    res.psnr_trajectory.emplace();
    res.psnr_initial = quality(y);
  }

  Image x = y;
  Image best = y;
  Image fx;
  try {
    fx = f(x);
    ++res.activations_used;
    res.initial_residual = l2_norm(fx - y) / ny;
    res.best_residual = res.initial_residual;
    res.stop_reason = StopReason::max_iters;
    if (res.initial_residual <= cfg.tau) {
      res.stop_reason = StopReason::converged;
    } else {
      for (int k = 1; k <= cfg.max_iters; ++k) {
        x = step(x, fx, res.activations_used);
        fx = f(x);
        ++res.activations_used;
        const double r = l2_norm(fx - y) / ny;
        res.iterations_run = k;
        if (cfg.record_trajectory) {
          res.residual_trajectory.push_back(r);
          if (truth) res.psnr_trajectory->push_back(quality(x));
        }
        if (r < res.best_residual) {
          res.best_residual = r;
          res.best_iteration = k;
          best = x;
        }
        if (!std::isfinite(r) || r > cfg.divergence_factor * res.initial_residual) {
          res.stop_reason = StopReason::diverged;
          break;
        }
        if (r <= cfg.tau) {
          res.stop_reason = StopReason::converged;
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    res.final_iterate = x;
    res.estimate = clamp01(best);
    throw RenditionFailure(std::string("rendition aborted: ") + e.what(), std::move(res));
  }

  res.final_iterate = x;
  res.estimate = clamp01(best);
  if (truth) {
    res.psnr_best = psnr(res.estimate, *truth);
    res.psnr_final = quality(x);
  }
  return res;
}

}  // namespace detail

/// Approximate-gradient rendition; one new activation of f per iteration.
inline RenditionResult render(const BlackBoxOperator& f, const Image& y, const SolverConfig& cfg,
                              const std::optional<Image>& truth = std::nullopt) {
  const double damp = 1.0 - cfg.gamma * cfg.mu;
  const double gamma = cfg.gamma;
  return detail::run_rendition(f, y, cfg, truth,
                               [&](const Image& x, const Image& fx, std::uint64_t&) {
                                 Image next(x.shape());
                                 for (std::size_t i = 0; i < x.size(); ++i)
                                   next[i] = damp * x[i] - gamma * (fx[i] - y[i]);
                                 return next;
                               });
}

/// Gradient descent on the full loss gradient
/// f(x) + grad f(x) x - y - x, with grad f(x) x taken as the radial finite
/// difference (f((1+eps) x) - f(x)) / eps. Two new activations per iteration.
inline RenditionResult render_exact(const BlackBoxOperator& f, const Image& y,
                                    const SolverConfig& cfg,
                                    const std::optional<Image>& truth = std::nullopt) {
  const double gamma = cfg.gamma;
  const double eps = cfg.epsilon;
  return detail::run_rendition(
      f, y, cfg, truth, [&](const Image& x, const Image& fx, std::uint64_t& activations) {
        const Image f_stretched = f(x + eps * x);
        ++activations;
        Image next(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double radial = (f_stretched[i] - fx[i]) / eps;
          next[i] = x[i] - gamma * (fx[i] + radial - y[i] - x[i]);
        }
        return next;
      });
}

/// RED-regularized rendition:
///   x_{k+1} = (1 - gamma (mu + lambda)) x_k + gamma lambda s(x_k) - gamma (f(x_k) - y).
/// With lambda = 0 the iterates coincide with render().
inline RenditionResult render_red(const BlackBoxOperator& f, const Image& y,
                                  const BlackBoxOperator& denoiser, const SolverConfig& cfg,
                                  const std::optional<Image>& truth = std::nullopt) {
  SolverConfig red_cfg = cfg;
  red_cfg.mode = SolverMode::red;
  const double damp = 1.0 - cfg.gamma * (cfg.mu + cfg.lambda);
  const double pull = cfg.gamma * cfg.lambda;
  const double gamma = cfg.gamma;
  return detail::run_rendition(
      f, y, red_cfg, truth, [&](const Image& x, const Image& fx, std::uint64_t& activations) {
        const Image sx = denoiser(x);
        ++activations;
        Image next(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i)
          next[i] = damp * x[i] + pull * sx[i] - gamma * (fx[i] - y[i]);
        return next;
      });
}

/// Dispatch on cfg.mode. `denoiser` is required for red mode.
inline RenditionResult solve(const BlackBoxOperator& f, const Image& y, const SolverConfig& cfg,
                             const std::optional<BlackBoxOperator>& denoiser = std::nullopt,
                             const std::optional<Image>& truth = std::nullopt) {
  switch (cfg.mode) {
    case SolverMode::approximate:
      return render(f, y, cfg, truth);
    case SolverMode::exact_gradient:
      return render_exact(f, y, cfg, truth);
    case SolverMode::red:
      if (!denoiser) throw SolverConfigError("red mode needs a denoiser");
      return render_red(f, y, *denoiser, cfg, truth);
  }
  throw std::logic_error("unknown solver mode");
}

}  // namespace rendition
