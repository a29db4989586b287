#pragma once

#include "hjbverify/rectifiable.hpp"
#include "hjbverify/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace hjbv {

struct Gradient {
  double ws = 0.0;  // time derivative
  Vec wy;           // state gradient
};

// Candidate W on the closure of Q, possibly +inf, with an optional analytic
// gradient and the exceptional set where it may fail to be differentiable.
class CandidateValueFunction {
 public:
  using ValueFn = std::function<double(double, const Vec&)>;
  using GradientFn = std::function<Gradient(double, const Vec&)>;

  CandidateValueFunction() = default;
  CandidateValueFunction(std::string label, ValueFn value, GradientFn gradient,
                         RectifiableSet exceptional);

  double operator()(double t, const Vec& x) const { return value_(t, x); }
  double value(double t, const Vec& x) const { return value_(t, x); }

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  // Analytic gradient when available, central differences otherwise.
  Gradient gradient(double t, const Vec& x, double h_grad) const;
  // Central differences with step h_grad * max(1, |coordinate|).
  Gradient fd_gradient(double t, const Vec& x, double h_grad) const;

  const RectifiableSet& exceptional_set() const { return exceptional_; }
  const std::string& label() const { return label_; }

  // W + offset, same gradient and exceptional set.
  CandidateValueFunction shifted(double offset) const;

 private:
  std::string label_;
  ValueFn value_;
  GradientFn gradient_;
  RectifiableSet exceptional_;
};

}  // namespace hjbv
