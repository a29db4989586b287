#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <vector>

namespace hjbv {

// State and control vectors. Problems here are low dimensional, so the
// storage is inline with a small fixed capacity.
inline constexpr int kMaxDim = 6;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double t = 0.0;
  Vec x;
};

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

inline Vec scalar_vec(double a) {
  Vec out(1);
  out[0] = a;
  return out;
}

// Axis-aligned window in (t, x).
struct Box {
  double t_lo = 0.0;
  double t_hi = 0.0;
  Vec x_lo;
  Vec x_hi;

  int dim() const { return static_cast<int>(x_lo.size()); }
  bool contains(double t, const Vec& x) const;
};

// Numeric tolerances shared by every module.
struct Tolerances {
  double dist_tol = 1e-9;
  double grad_tol = 1e-4;
  double h_grad = 1e-5;
};

}  // namespace hjbv
