#pragma once

// Dense linear operators f(x) = W x and the closed-form k-th iterate of the
// rendition recursion in the linear case.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "rendition/black_box.hpp"
#include "rendition/image.hpp"

namespace rendition {

class DenseLinearOperator {
 public:
  explicit DenseLinearOperator(Eigen::MatrixXd w) : w_(std::move(w)) {
    if (w_.rows() != w_.cols()) throw DimensionError("dense operator must be square");
    if (!w_.allFinite()) throw std::invalid_argument("dense operator has non-finite entries");
  }

  /// Materializes a (presumed linear) black box on `shape` by probing it with
  /// every unit impulse; shape.samples() activations.
  static DenseLinearOperator from_operator(const BlackBoxOperator& f, const Shape& shape) {
    const auto n = static_cast<Eigen::Index>(shape.samples());
    Eigen::MatrixXd w(n, n);
    Image e(shape, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      e[static_cast<std::size_t>(j)] = 1.0;
      const Image col = f(e);
      for (Eigen::Index i = 0; i < n; ++i) w(i, j) = col[static_cast<std::size_t>(i)];
      e[static_cast<std::size_t>(j)] = 0.0;
    }
    return DenseLinearOperator(std::move(w));
  }

  [[nodiscard]] Eigen::Index dimension() const { return w_.rows(); }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return w_; }

  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != w_.cols()) throw DimensionError("dense operator: vector length mismatch");
    return w_ * x;
  }

  /// Black-box view acting on flattened images of the given shape.
  [[nodiscard]] BlackBoxOperator as_operator(const Shape& shape, std::string label = "dense") const {
    if (static_cast<Eigen::Index>(shape.samples()) != dimension()) {
      throw DimensionError("dense operator dimension " + std::to_string(dimension()) +
                           " does not match shape " + to_string(shape));
    }
    const Eigen::MatrixXd w = w_;
    return BlackBoxOperator(std::move(label), [w, shape](const Image& x) {
      if (x.shape() != shape) throw DimensionError("dense operator: image shape mismatch");
      Eigen::Map<const Eigen::VectorXd> v(x.samples().data(), static_cast<Eigen::Index>(x.size()));
      const Eigen::VectorXd out = w * v;
      return Image(shape, std::vector<double>(out.data(), out.data() + out.size()));
    });
  }

  /// Largest singular value ||W||_2.
  [[nodiscard]] double spectral_norm() const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w_);
    return svd.singularValues()(0);
  }

 private:
  Eigen::MatrixXd w_;
};

inline Eigen::VectorXd to_vector(const Image& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.samples().data(),
                                           static_cast<Eigen::Index>(img.size()));
}

inline Image to_image(const Eigen::VectorXd& v, const Shape& shape) {
  return Image(shape, std::vector<double>(v.data(), v.data() + v.size()));
}

/// k-th iterate of x_{j+1} = (1 - gamma mu) x_j - gamma (W x_j - x0), which
/// is the rendition recursion for f = W started at x_0 = y:
///
///   x_k = A^k x0 + gamma * sum_{j<k} A^j x0,   A = (1 - gamma mu) I - gamma W.
///
/// Evaluated as repeated matrix-vector products against the explicit matrix.
inline Eigen::VectorXd closed_form_linear_iterate(const DenseLinearOperator& w,
                                                  const Eigen::VectorXd& x0, double gamma,
                                                  double mu, int k) {
  if (x0.size() != w.dimension()) throw DimensionError("closed form: x0 length mismatch");
  if (k < 0) throw std::invalid_argument("closed form: k must be >= 0");
  const Eigen::Index n = w.dimension();
  const Eigen::MatrixXd a =
      (1.0 - gamma * mu) * Eigen::MatrixXd::Identity(n, n) - gamma * w.matrix();
  Eigen::VectorXd power = x0;  // A^j x0
  Eigen::VectorXd series = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < k; ++j) {
    series += power;
    power = a * power;
  }
  return power + gamma * series;
}

/// [alpha I + gamma (I - W)]^k x0 with alpha = 1 - gamma mu. This is the
/// homogeneous recursion with the observation term replaced by the current
/// iterate; it agrees with closed_form_linear_iterate only for k <= 1.
inline Eigen::VectorXd homogeneous_linear_iterate(const DenseLinearOperator& w,
                                                  const Eigen::VectorXd& x0, double gamma,
                                                  double mu, int k) {
  if (x0.size() != w.dimension()) throw DimensionError("homogeneous iterate: x0 length mismatch");
  const Eigen::Index n = w.dimension();
  const Eigen::MatrixXd b = (1.0 - gamma * mu + gamma) * Eigen::MatrixXd::Identity(n, n) -
                            gamma * w.matrix();
  Eigen::VectorXd x = x0;
  for (int j = 0; j < k; ++j) x = b * x;
  return x;
}

/// Fixed point of the linear recursion: (W + mu I) x = y.
inline Eigen::VectorXd linear_fixed_point(const DenseLinearOperator& w, const Eigen::VectorXd& y,
                                          double mu) {
  const Eigen::Index n = w.dimension();
  return (w.matrix() + mu * Eigen::MatrixXd::Identity(n, n)).partialPivLu().solve(y);
}

}  // namespace rendition
