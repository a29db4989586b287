#pragma once

#include <hjbverify/errors.hpp>
#include <hjbverify/gallery.hpp>
#include <hjbverify/integrate.hpp>

#include <cmath>
#include <numbers>

namespace testing_support {

using namespace hjbv;

// x' = 0 in one dimension with unit running cost, targets at t >= 1.
inline ControlProblem still_problem() {
  ControlProblem p;
  p.name = "still";
  p.dim = 1;
  p.dynamics = [](double, const Vec&, const Vec&) { return scalar_vec(0.0); };
  p.running_cost = [](double, const Vec&, const Vec&) { return 1.0; };
  p.final_cost = [](double, const Vec&) { return 0.0; };
  SetSpec S;
  S.label = "t >= 1";
  S.contains = [](double t, const Vec&) { return t >= 1.0; };
  S.distance = [](double t, const Vec&) { return std::max(0.0, 1.0 - t); };
  S.sampler = [](const Box& w, std::size_t n, std::uint64_t seed) {
    Box b = w;
    b.t_lo = std::max(1.0, w.t_lo);
    return b.t_lo > b.t_hi ? std::vector<Point>{} : uniform_points(b, n, seed);
  };
  p.target = S;
  p.domain = SetSpec::everything(1);
  p.verification_domain = SetSpec::everything(1);
  p.verification_is_domain = true;
  p.control_set = ControlSetSpec::interval(-1.0, 1.0);
  return p;
}

inline Box box2(double t_lo, double t_hi, double lo, double hi) {
  return Box{t_lo, t_hi, vec({lo, lo}), vec({hi, hi})};
}

}  // namespace testing_support
