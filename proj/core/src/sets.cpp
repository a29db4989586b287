#include "hjbverify/sets.hpp"

#include "hjbverify/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hjbv {

namespace {

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

}  // namespace

std::vector<Point> SetSpec::sample(const Box& window, std::size_t count, std::uint64_t seed) const {
  if (!sampler) return {};
  return sampler(window, count, seed);
}

std::vector<Point> uniform_points(const Box& window, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point p;
    p.t = window.t_lo + (window.t_hi - window.t_lo) * unit(rng);
    p.x = Vec(window.dim());
    for (int j = 0; j < window.dim(); ++j) {
      p.x[j] = window.x_lo[j] + (window.x_hi[j] - window.x_lo[j]) * unit(rng);
    }
    out.push_back(std::move(p));
  }
  return out;
}

SetSpec SetSpec::everything(int dim) {
  SetSpec s;
  s.label = "R x R^" + std::to_string(dim);
  s.contains = [](double, const Vec&) { return true; };
  s.distance = [](double, const Vec&) { return 0.0; };
  s.sampler = [](const Box&, std::size_t, std::uint64_t) { return std::vector<Point>{}; };
  s.nearest = [](double t, const Vec& x) { return Point{t, x}; };
  s.whole_space = true;
  return s;
}

SetSpec SetSpec::state_ball(Vec center, double radius, double t_lo, double t_hi) {
  SetSpec s;
  s.label = radius == 0.0 ? "state point" : "state ball";
  auto time_gap = [t_lo, t_hi](double t) {
    return std::max({0.0, t_lo - t, t - t_hi});
  };
  s.distance = [center, radius, time_gap](double t, const Vec& x) {
    double dx = std::max(0.0, (x - center).norm() - radius);
    double dt = time_gap(t);
    return std::hypot(dx, dt);
  };
  s.contains = [center, radius, time_gap](double t, const Vec& x) {
    return time_gap(t) == 0.0 && (x - center).norm() <= radius;
  };
  s.nearest = [center, radius, t_lo, t_hi](double t, const Vec& x) {
    Point p;
    p.t = std::clamp(t, t_lo, t_hi);
    Vec d = x - center;
    double n = d.norm();
    p.x = (n <= radius) ? x : Vec(center + (radius / n) * d);
    return p;
  };
  s.sampler = [center, radius, t_lo, t_hi](const Box& w, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss;
    double lo = std::max(finite_or(t_lo, w.t_lo), w.t_lo);
    double hi = std::min(finite_or(t_hi, w.t_hi), w.t_hi);
    std::vector<Point> out;
    if (lo > hi) return out;
    for (std::size_t i = 0; i < count; ++i) {
      Point p;
      p.t = lo + (hi - lo) * unit(rng);
      Vec dir(center.size());
      for (Eigen::Index j = 0; j < dir.size(); ++j) dir[j] = gauss(rng);
      double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(center.size()));
      double n = dir.norm();
      p.x = n > 0.0 ? Vec(center + (r / n) * dir) : center;
      out.push_back(std::move(p));
    }
    return out;
  };
  return s;
}

SetSpec SetSpec::open_slab(int dim, int axis, double lo, double hi, double t_lo) {
  SetSpec s;
  s.label = "open slab";
  s.contains = [axis, lo, hi, t_lo](double t, const Vec& x) {
    return t > t_lo && x[axis] > lo && x[axis] < hi;
  };
  s.distance = [axis, lo, hi, t_lo](double t, const Vec& x) {
    double dx = std::max({0.0, lo - x[axis], x[axis] - hi});
    double dt = std::isfinite(t_lo) ? std::max(0.0, t_lo - t) : 0.0;
    return std::hypot(dx, dt);
  };
  s.sampler = [dim, axis, lo, hi, t_lo](const Box& w, std::size_t count, std::uint64_t seed) {
    // Boundary: the two faces x[axis] = lo, hi (and t = t_lo when finite).
    std::vector<Point> out;
    auto pts = uniform_points(w, count, seed);
    std::size_t faces = std::isfinite(t_lo) ? 3 : 2;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Point p = pts[i];
      std::size_t face = i % faces;
      if (face == 0) p.x[axis] = lo;
      if (face == 1) p.x[axis] = hi;
      if (face == 2) {
        p.t = t_lo;
        p.x[axis] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
      }
      if (p.t < w.t_lo || p.t > w.t_hi) continue;
      bool inside = true;
      for (int j = 0; j < dim; ++j) inside = inside && p.x[j] >= w.x_lo[j] && p.x[j] <= w.x_hi[j];
      if (inside) out.push_back(std::move(p));
    }
    return out;
  };
  return s;
}

SetSpec SetSpec::open_state_ball(Vec center, double radius, double t_lo) {
  SetSpec s;
  s.label = "open state ball";
  s.contains = [center, radius, t_lo](double t, const Vec& x) {
    return t > t_lo && (x - center).norm() < radius;
  };
  s.distance = [center, radius, t_lo](double t, const Vec& x) {
    double dx = std::max(0.0, (x - center).norm() - radius);
    double dt = std::isfinite(t_lo) ? std::max(0.0, t_lo - t) : 0.0;
    return std::hypot(dx, dt);
  };
  s.sampler = [center, radius](const Box& w, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss;
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) {
      Point p;
      p.t = w.t_lo + (w.t_hi - w.t_lo) * unit(rng);
      Vec dir(center.size());
      for (Eigen::Index j = 0; j < dir.size(); ++j) dir[j] = gauss(rng);
      p.x = center + radius * dir / dir.norm();
      out.push_back(std::move(p));
    }
    return out;
  };
  return s;
}

std::optional<Point> sampled_inclusion_failure(const SetSpec& a, const SetSpec& b,
                                               const Box& window, std::size_t count,
                                               std::uint64_t seed) {
  if (b.whole_space) return std::nullopt;
  for (const Point& p : a.sample(window, count, seed)) {
    if (!b.contains(p.t, p.x)) return p;
  }
  return std::nullopt;
}

std::vector<Vec> ControlSetSpec::sample(std::size_t count) const {
  std::vector<Vec> out = lattice ? lattice(count) : std::vector<Vec>{};
  for (const Vec& e : extreme_points) {
    bool present = std::any_of(out.begin(), out.end(), [&](const Vec& v) { return v == e; });
    if (!present) out.push_back(e);
  }
  return out;
}

Vec ControlSetSpec::project(const Vec& u, std::size_t count) const {
  auto pts = sample(count);
  if (pts.empty()) throw PreconditionError("control set has no samples");
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double d = (pts[i] - u).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return pts[best];
}

ControlSetSpec ControlSetSpec::interval(double lo, double hi) {
  ControlSetSpec c;
  c.dim = 1;
  c.lattice = [lo, hi](std::size_t count) {
    std::vector<Vec> out;
    if (count == 0) return out;
    if (count == 1) {
      out.push_back(scalar_vec(0.5 * (lo + hi)));
      return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
      double a = static_cast<double>(i) / static_cast<double>(count - 1);
      double v = (i + 1 == count) ? hi : lo + (hi - lo) * a;
      out.push_back(scalar_vec(v));
    }
    return out;
  };
  c.contains = [lo, hi](const Vec& u) { return u.size() == 1 && u[0] >= lo && u[0] <= hi; };
  c.extreme_points = {scalar_vec(lo), scalar_vec(hi)};
  return c;
}

}  // namespace hjbv
