#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rendition/image.hpp"

namespace rendition {

/// Raised when an operator breaks its contract (e.g. changes the shape).
class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation-only handle to an image operator f.
///
/// Copies share state, including the activation counter, so a solver holding a
/// copy still reports into the caller's count. The counter is atomic and
/// evaluation is otherwise const, so one handle may be evaluated from several
/// threads at once.
///
/// A composite's activation count is the sum of its children's counts; a leaf
/// counts its own evaluations.
class BlackBoxOperator {
 public:
  using Function = std::function<Image(const Image&)>;

  BlackBoxOperator(std::string label, Function fn)
      : state_(std::make_shared<State>(std::move(label), std::move(fn))) {}

  static BlackBoxOperator composite(std::string label, std::vector<BlackBoxOperator> children) {
    if (children.empty()) throw std::invalid_argument("composite operator needs children");
    auto chain = children;
    BlackBoxOperator op(std::move(label), [chain](const Image& x) {
      Image y = x;
      for (const auto& child : chain) y = child(y);
      return y;
    });
    op.state_->children = std::move(children);
    return op;
  }

  Image operator()(const Image& x) const { return evaluate(x); }

  Image evaluate(const Image& x) const {
    state_->count.fetch_add(1, std::memory_order_relaxed);
    Image y = state_->fn(x);
    if (y.shape() != x.shape()) {
      throw OperatorError(state_->label + ": output shape " + to_string(y.shape()) +
                          " differs from input " + to_string(x.shape()));
    }
    return y;
  }

  [[nodiscard]] const std::string& label() const { return state_->label; }

  [[nodiscard]] std::uint64_t activations() const {
    if (state_->children.empty()) return state_->count.load(std::memory_order_relaxed);
    return std::accumulate(state_->children.begin(), state_->children.end(), std::uint64_t{0},
                           [](std::uint64_t acc, const BlackBoxOperator& c) {
                             return acc + c.activations();
                           });
  }

 private:
  struct State {
    State(std::string l, Function f) : label(std::move(l)), fn(std::move(f)) {}
    std::string label;
    Function fn;
    std::atomic<std::uint64_t> count{0};
    std::vector<BlackBoxOperator> children;
  };

  std::shared_ptr<State> state_;
};

inline BlackBoxOperator identity_operator() {
  return BlackBoxOperator("identity", [](const Image& x) { return x; });
}

/// x -> c*x
inline BlackBoxOperator scaling_operator(double c) {
  return BlackBoxOperator("scale(" + std::to_string(c) + ")",
                          [c](const Image& x) { return c * x; });
}

}  // namespace rendition
