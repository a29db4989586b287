#pragma once

#include "hjbverify/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hjbv {

// A subset of time-state space described by membership, a distance
// (unsigned, 0 on the set) and a sampler. For closed sets (targets) the
// sampler yields points of the set; for open sets (domains) it yields points
// of the boundary. Samplers return at most `count` points in `window`.
struct SetSpec {
  using Membership = std::function<bool(double, const Vec&)>;
  using Distance = std::function<double(double, const Vec&)>;
  using Sampler = std::function<std::vector<Point>(const Box&, std::size_t, std::uint64_t)>;
  using Nearest = std::function<Point(double, const Vec&)>;

  std::string label;
  Membership contains;
  Distance distance;
  Sampler sampler;
  Nearest nearest;  // optional projection onto the set
  bool whole_space = false;

  std::vector<Point> sample(const Box& window, std::size_t count, std::uint64_t seed) const;

  // The whole of R x R^n. Its boundary is empty.
  static SetSpec everything(int dim);
  // {(t, x) : |x - center| <= radius, t in [t_lo, t_hi]}. Radius 0 gives the
  // cylinder over a single state.
  static SetSpec state_ball(Vec center, double radius, double t_lo = -kInf, double t_hi = kInf);
  // Open slab {lo < x[axis] < hi}, optionally intersected with t > t_lo.
  static SetSpec open_slab(int dim, int axis, double lo, double hi, double t_lo = -kInf);
  // Open ball {|x - center| < radius} in state space, all times after t_lo.
  static SetSpec open_state_ball(Vec center, double radius, double t_lo = -kInf);
};

// Uniform random points of a box.
std::vector<Point> uniform_points(const Box& window, std::size_t count, std::uint64_t seed);

// Sampled inclusion check a ⊆ b: every sample of a (a closed set) lies in b.
// Returns the first counterexample, if any.
std::optional<Point> sampled_inclusion_failure(const SetSpec& a, const SetSpec& b,
                                               const Box& window, std::size_t count,
                                               std::uint64_t seed);

// Control sets are only accessed through samples.
struct ControlSetSpec {
  int dim = 1;
  std::function<std::vector<Vec>(std::size_t)> lattice;
  std::function<bool(const Vec&)> contains;
  std::vector<Vec> extreme_points;

  // Lattice of `count` points plus every extreme point, without duplicates.
  std::vector<Vec> sample(std::size_t count) const;
  // Nearest point among sample(count).
  Vec project(const Vec& u, std::size_t count) const;

  static ControlSetSpec interval(double lo, double hi);
};

}  // namespace hjbv
