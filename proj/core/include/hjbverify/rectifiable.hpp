#pragma once

#include "hjbverify/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hjbv {

// One parameterized piece of a positive-codimension set. The embedding maps
// a parameter box in R^k either into (t, x) space, or (for time cylinders)
// into state space, in which case the piece is R x image.
struct ManifoldPiece {
  std::string label;
  Vec param_lo;
  Vec param_hi;
  std::function<Vec(const Vec&)> embed;
  bool time_cylinder = false;
  // The piece stands for its closed tube of this radius.
  double inflate = 0.0;
  // Lattice cells per parameter axis at refinement 0.
  int base_cells = 64;
  // Optional exact distance from (t, x) to the (uninflated) piece.
  std::function<double(double, const Vec&)> exact_distance;

  int param_dim() const { return static_cast<int>(param_lo.size()); }
  int embed_dim(int state_dim) const { return time_cylinder ? state_dim : state_dim + 1; }

  // Segment between two points of (t, x) space (or state space when
  // `cylinder`), with an exact distance.
  static ManifoldPiece segment(std::string label, Vec a, Vec b, bool cylinder);
  // Circular arc in a 2-D state plane, angles in radians measured
  // counter-clockwise from the +x1 axis, time cylinder, exact distance.
  static ManifoldPiece circle_arc(std::string label, double cx, double cy, double radius,
                                  double angle_lo, double angle_hi);
};

// Finite union of pieces with lower-bound distance queries. Copies share the
// lazily built sample indices; queries are safe from concurrent threads.
class RectifiableSet {
 public:
  RectifiableSet() = default;
  RectifiableSet(int state_dim, std::vector<ManifoldPiece> pieces, int default_refinement = 4);

  bool empty() const { return pieces().empty(); }
  int state_dim() const { return state_dim_; }
  const std::vector<ManifoldPiece>& pieces() const;
  int default_refinement() const { return default_refinement_; }

  // Lower bound d with d <= true distance <= d + mesh(refinement). +inf
  // when there are no pieces.
  double distance(double t, const Vec& x, int refinement) const;
  double distance(double t, const Vec& x) const { return distance(t, x, default_refinement_); }

  // Largest sampling mesh over sampled pieces at this refinement (0 when
  // every piece has an exact distance).
  double mesh(int refinement) const;

  // Embedded lattice points of every sampled piece at this refinement, as
  // (t, x) points (t is NaN for cylinder pieces).
  std::vector<Point> lattice_points(int refinement) const;

 private:
  struct Impl;
  int state_dim_ = 0;
  int default_refinement_ = 4;
  std::shared_ptr<Impl> impl_;
};

}  // namespace hjbv
