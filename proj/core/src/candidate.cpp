#include "hjbverify/candidate.hpp"

#include <algorithm>
#include <cmath>

namespace hjbv {

CandidateValueFunction::CandidateValueFunction(std::string label, ValueFn value,
                                               GradientFn gradient, RectifiableSet exceptional)
    : label_(std::move(label)), value_(std::move(value)), gradient_(std::move(gradient)),
      exceptional_(std::move(exceptional)) {}

Gradient CandidateValueFunction::gradient(double t, const Vec& x, double h_grad) const {
  if (gradient_) return gradient_(t, x);
  return fd_gradient(t, x, h_grad);
}

Gradient CandidateValueFunction::fd_gradient(double t, const Vec& x, double h_grad) const {
  Gradient g;
  const double ht = h_grad * std::max(1.0, std::abs(t));
  g.ws = (value_(t + ht, x) - value_(t - ht, x)) / (2.0 * ht);
  g.wy = Vec(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = h_grad * std::max(1.0, std::abs(x[i]));
    Vec xp = x;
    Vec xm = x;
    xp[i] += h;
    xm[i] -= h;
    g.wy[i] = (value_(t, xp) - value_(t, xm)) / (2.0 * h);
  }
  return g;
}

CandidateValueFunction CandidateValueFunction::shifted(double offset) const {
  auto base = value_;
  return CandidateValueFunction(
      label_ + (offset >= 0 ? " + " : " - ") + std::to_string(std::abs(offset)),
      [base, offset](double t, const Vec& x) { return base(t, x) + offset; }, gradient_,
      exceptional_);
}

}  // namespace hjbv
