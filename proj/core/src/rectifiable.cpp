#include "hjbverify/rectifiable.hpp"

#include "hjbverify/errors.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace hjbv {

ManifoldPiece ManifoldPiece::segment(std::string label, Vec a, Vec b, bool cylinder) {
  ManifoldPiece p;
  p.label = std::move(label);
  p.param_lo = scalar_vec(0.0);
  p.param_hi = scalar_vec(1.0);
  p.time_cylinder = cylinder;
  p.base_cells = 16;
  p.embed = [a, b](const Vec& s) { return Vec(a + s[0] * (b - a)); };
  p.exact_distance = [a, b, cylinder](double t, const Vec& x) {
    Vec q(a.size());
    if (cylinder) {
      q = x;
    } else {
      q[0] = t;
      q.tail(a.size() - 1) = x;
    }
    Vec ab = b - a;
    double len2 = ab.squaredNorm();
    double s = len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (q - (a + s * ab)).norm();
  };
  return p;
}

ManifoldPiece ManifoldPiece::circle_arc(std::string label, double cx, double cy, double radius,
                                        double angle_lo, double angle_hi) {
  ManifoldPiece p;
  p.label = std::move(label);
  p.param_lo = scalar_vec(angle_lo);
  p.param_hi = scalar_vec(angle_hi);
  p.time_cylinder = true;
  p.base_cells = 64;
  p.embed = [cx, cy, radius](const Vec& s) {
    return vec({cx + radius * std::cos(s[0]), cy + radius * std::sin(s[0])});
  };
  p.exact_distance = [cx, cy, radius, angle_lo, angle_hi](double, const Vec& x) {
    const double dx = x[0] - cx;
    const double dy = x[1] - cy;
    const double r = std::hypot(dx, dy);
    double ang = std::atan2(dy, dx);
    const double two_pi = 2.0 * std::numbers::pi;
    // Bring the angle into [angle_lo, angle_lo + 2 pi).
    while (ang < angle_lo) ang += two_pi;
    while (ang >= angle_lo + two_pi) ang -= two_pi;
    if (r > 0.0 && ang <= angle_hi) return std::abs(r - radius);
    auto end_dist = [&](double a) {
      return std::hypot(x[0] - cx - radius * std::cos(a), x[1] - cy - radius * std::sin(a));
    };
    return std::min(end_dist(angle_lo), end_dist(angle_hi));
  };
  return p;
}

namespace {

struct NearestIndex {
  virtual ~NearestIndex() = default;
  virtual double nearest(const Vec& q) const = 0;
};

template <std::size_t D>
class RtreeIndex final : public NearestIndex {
 public:
  using P = bg::model::point<double, D, bg::cs::cartesian>;

  explicit RtreeIndex(const std::vector<Vec>& pts) {
    std::vector<P> items;
    items.reserve(pts.size());
    for (const Vec& v : pts) items.push_back(to_point(v));
    tree_ = bgi::rtree<P, bgi::rstar<16>>(items.begin(), items.end());
  }

  double nearest(const Vec& q) const override {
    P target = to_point(q);
    for (auto it = tree_.qbegin(bgi::nearest(target, 1)); it != tree_.qend(); ++it) {
      return bg::distance(target, *it);
    }
    return kInf;
  }

 private:
  static P to_point(const Vec& v) {
    P p;
    set<0>(p, v);
    return p;
  }
  template <std::size_t I>
  static void set(P& p, const Vec& v) {
    if constexpr (I < D) {
      bg::set<I>(p, v[static_cast<Eigen::Index>(I)]);
      set<I + 1>(p, v);
    }
  }

  bgi::rtree<P, bgi::rstar<16>> tree_;
};

class LinearIndex final : public NearestIndex {
 public:
  explicit LinearIndex(std::vector<Vec> pts) : pts_(std::move(pts)) {}
  double nearest(const Vec& q) const override {
    double best = kInf;
    for (const Vec& p : pts_) best = std::min(best, (p - q).norm());
    return best;
  }

 private:
  std::vector<Vec> pts_;
};

std::unique_ptr<NearestIndex> make_index(const std::vector<Vec>& pts, int dim) {
  switch (dim) {
    case 1: return std::make_unique<RtreeIndex<1>>(pts);
    case 2: return std::make_unique<RtreeIndex<2>>(pts);
    case 3: return std::make_unique<RtreeIndex<3>>(pts);
    case 4: return std::make_unique<RtreeIndex<4>>(pts);
    default: return std::make_unique<LinearIndex>(pts);
  }
}

struct Level {
  std::vector<Vec> points;
  double mesh = 0.0;
  std::unique_ptr<NearestIndex> index;
};

// Lattice nodes of the parameter box with `cells` cells per axis, and the
// mesh: twice the largest distance from a piece point to its nearest node,
// estimated by summing edge arc lengths (chord through the edge midpoint).
Level build_level(const ManifoldPiece& piece, int state_dim, int refinement) {
  const int k = piece.param_dim();
  const long cells = static_cast<long>(piece.base_cells) << refinement;
  const long nodes_per_axis = cells + 1;
  long total = 1;
  for (int a = 0; a < k; ++a) total *= nodes_per_axis;
  if (total > 50'000'000) throw SizeGuardError("rectifiable piece lattice too large: " + piece.label);

  auto param_at = [&](const std::vector<long>& idx) {
    Vec s(k);
    for (int a = 0; a < k; ++a) {
      double frac = static_cast<double>(idx[static_cast<std::size_t>(a)]) / static_cast<double>(cells);
      s[a] = piece.param_lo[a] + (piece.param_hi[a] - piece.param_lo[a]) * frac;
    }
    return s;
  };

  Level lvl;
  lvl.points.reserve(static_cast<std::size_t>(total));
  std::vector<long> idx(static_cast<std::size_t>(k), 0);
  double worst_cell = 0.0;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (int a = k - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = rem % nodes_per_axis;
      rem /= nodes_per_axis;
    }
    Vec s = param_at(idx);
    Vec p = piece.embed(s);
    lvl.points.push_back(p);
    double cell_span = 0.0;
    bool interior = true;
    for (int a = 0; a < k; ++a) interior = interior && idx[static_cast<std::size_t>(a)] < cells;
    if (!interior) continue;
    for (int a = 0; a < k; ++a) {
      Vec s1 = s;
      Vec sm = s;
      double step = (piece.param_hi[a] - piece.param_lo[a]) / static_cast<double>(cells);
      s1[a] += step;
      sm[a] += 0.5 * step;
      Vec pm = piece.embed(sm);
      Vec p1 = piece.embed(s1);
      cell_span += (pm - p).norm() + (p1 - pm).norm();
    }
    worst_cell = std::max(worst_cell, cell_span);
  }
  lvl.mesh = worst_cell;
  lvl.index = make_index(lvl.points, piece.embed_dim(state_dim));
  return lvl;
}

}  // namespace

struct RectifiableSet::Impl {
  std::vector<ManifoldPiece> pieces;
  mutable std::mutex mu;
  mutable std::map<std::pair<std::size_t, int>, std::shared_ptr<const Level>> levels;

  std::shared_ptr<const Level> level(std::size_t piece, int refinement, int state_dim) const {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(piece, refinement);
    auto it = levels.find(key);
    if (it != levels.end()) return it->second;
    auto lvl = std::make_shared<const Level>(build_level(pieces[piece], state_dim, refinement));
    levels.emplace(key, lvl);
    return lvl;
  }
};

RectifiableSet::RectifiableSet(int state_dim, std::vector<ManifoldPiece> pieces,
                               int default_refinement)
    : state_dim_(state_dim), default_refinement_(default_refinement),
      impl_(std::make_shared<Impl>()) {
  for (const auto& p : pieces) {
    if (p.param_dim() >= state_dim + 1) {
      throw PreconditionError("piece '" + p.label + "' has no positive codimension");
    }
    if (p.time_cylinder && p.param_dim() >= state_dim) {
      throw PreconditionError("cylinder piece '" + p.label + "' has no positive codimension");
    }
    if (!p.embed) throw PreconditionError("piece '" + p.label + "' has no embedding");
  }
  impl_->pieces = std::move(pieces);
}

const std::vector<ManifoldPiece>& RectifiableSet::pieces() const {
  static const std::vector<ManifoldPiece> none;
  return impl_ ? impl_->pieces : none;
}

double RectifiableSet::distance(double t, const Vec& x, int refinement) const {
  if (refinement < 0) throw PreconditionError("refinement must be non-negative");
  if (empty()) return kInf;
  double best = kInf;
  const auto& ps = impl_->pieces;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const ManifoldPiece& piece = ps[i];
    double d;
    if (piece.exact_distance) {
      d = piece.exact_distance(t, x);
    } else {
      Vec q(piece.embed_dim(state_dim_));
      if (piece.time_cylinder) {
        q = x;
      } else {
        q[0] = t;
        q.tail(state_dim_) = x;
      }
      d = 0.0;
      for (int r = 0; r <= refinement; ++r) {
        auto lvl = impl_->level(i, r, state_dim_);
        d = std::max(d, lvl->index->nearest(q) - 0.5 * lvl->mesh);
      }
    }
    best = std::min(best, std::max(0.0, d - piece.inflate));
    if (best == 0.0) break;
  }
  return best;
}

double RectifiableSet::mesh(int refinement) const {
  double m = 0.0;
  if (empty()) return m;
  for (std::size_t i = 0; i < impl_->pieces.size(); ++i) {
    if (impl_->pieces[i].exact_distance) continue;
    m = std::max(m, impl_->level(i, refinement, state_dim_)->mesh);
  }
  return m;
}

std::vector<Point> RectifiableSet::lattice_points(int refinement) const {
  std::vector<Point> out;
  if (empty()) return out;
  for (std::size_t i = 0; i < impl_->pieces.size(); ++i) {
    const auto& piece = impl_->pieces[i];
    auto lvl = impl_->level(i, refinement, state_dim_);
    for (const Vec& p : lvl->points) {
      if (piece.time_cylinder) {
        out.push_back({std::nan(""), p});
      } else {
        out.push_back({p[0], Vec(p.tail(state_dim_))});
      }
    }
  }
  return out;
}

}  // namespace hjbv
