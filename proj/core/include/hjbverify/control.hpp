#pragma once

#include "hjbverify/types.hpp"

#include <vector>

namespace hjbv {

// Left-continuous step control: values[i] is active on (t_i, t_{i+1}].
class PiecewiseConstantControl {
 public:
  PiecewiseConstantControl() = default;
  PiecewiseConstantControl(std::vector<double> breakpoints, std::vector<Vec> values);

  static PiecewiseConstantControl constant(double t0, double t1, const Vec& value);
  // m equal pieces on [t0, t1].
  static PiecewiseConstantControl uniform(double t0, double t1, std::vector<Vec> values);

  // Throws DomainError outside (t_0, t_m].
  const Vec& operator()(double t) const;
  const Vec& eval(double t) const { return (*this)(t); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Vec>& values() const { return values_; }
  double start() const { return breakpoints_.front(); }
  double end() const { return breakpoints_.back(); }
  int control_dim() const { return static_cast<int>(values_.front().size()); }

  // Same function with an extra breakpoint at t (no-op if already present).
  PiecewiseConstantControl refined_at(double t) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<Vec> values_;
};

}  // namespace hjbv
