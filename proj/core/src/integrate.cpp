#include "hjbverify/integrate.hpp"

#include "hjbverify/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hjbv {

Vec rk4_step(const ControlProblem& problem, double t, const Vec& x, const Vec& u, double h) {
  const Vec k1 = problem.f(t, x, u);
  const Vec k2 = problem.f(t + 0.5 * h, x + (0.5 * h) * k1, u);
  const Vec k3 = problem.f(t + 0.5 * h, x + (0.5 * h) * k2, u);
  const Vec k4 = problem.f(t + h, x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<double> step_schedule(const PiecewiseConstantControl& control, double t0, double tf,
                                  double h) {
  if (!(tf > t0)) throw PreconditionError("integration needs tf > t0");
  if (!(h > 0.0)) throw PreconditionError("integration step must be positive");
  if (t0 < control.start() || tf > control.end()) {
    throw PreconditionError("control does not cover the integration interval");
  }
  std::vector<double> marks{t0};
  for (double b : control.breakpoints()) {
    if (b > t0 && b < tf) marks.push_back(b);
  }
  marks.push_back(tf);
  std::vector<double> out{t0};
  for (std::size_t i = 1; i < marks.size(); ++i) {
    const double a = marks[i - 1];
    const double b = marks[i];
    const auto n = static_cast<long>(std::ceil((b - a) / h - 1e-9));
    const long steps = std::max(1L, n);
    for (long j = 1; j < steps; ++j) {
      out.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(steps));
    }
    out.push_back(b);
  }
  return out;
}

double simpson_step_cost(const ControlProblem& pr, double t, const Vec& x, const Vec& x_end,
                         const Vec& u, double h) {
  const Vec xm = rk4_step(pr, t, x, u, 0.5 * h);
  return (h / 6.0) * (pr.L(t, x, u) + 4.0 * pr.L(t + 0.5 * h, xm, u) + pr.L(t + h, x_end, u));
}

namespace {

void check_finite(const Vec& x, double t_last) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os.precision(17);
    os << "integration blew up after t=" << t_last;
    throw BlowupError(os.str(), t_last);
  }
}

// Hermite state inside a step from the end-point slopes.
Vec hermite(const Vec& x0, const Vec& x1, const Vec& f0, const Vec& f1, double h, double s) {
  const double r = s / h;
  const double r2 = r * r;
  const double r3 = r2 * r;
  return (2 * r3 - 3 * r2 + 1) * x0 + ((r3 - 2 * r2 + r) * h) * f0 + (-2 * r3 + 3 * r2) * x1 +
         ((r3 - r2) * h) * f1;
}

}  // namespace

Trajectory integrate(const ControlProblem& problem, const PiecewiseConstantControl& control,
                     double t0, const Vec& x0, double tf, double step, IntegrateOptions options) {
  if (!problem.domain.contains(t0, x0)) {
    throw PreconditionError("initial point outside the domain: " + describe({t0, x0}));
  }
  if (step <= 0.0) step = (tf - t0) / 2000.0;
  const auto sched = step_schedule(control, t0, tf, step);

  Trajectory tr;
  tr.control = control;
  tr.times.reserve(sched.size());
  tr.states.reserve(sched.size());
  tr.times.push_back(t0);
  tr.states.push_back(x0);
  if (options.accumulate_cost) tr.cost.push_back(0.0);

  Vec x = x0;
  for (std::size_t i = 1; i < sched.size(); ++i) {
    const double a = sched[i - 1];
    const double b = sched[i];
    const double h = b - a;
    const Vec& u = control(b);
    Vec x1 = rk4_step(problem, a, x, u, h);
    check_finite(x1, a);

    if (options.stop_on_domain_exit && !problem.domain.whole_space &&
        !problem.domain.contains(b, x1)) {
      // Last inside / first outside bracket in s, refined to dist_tol.
      double lo = 0.0;
      double hi = h;
      while (hi - lo > options.dist_tol * std::max(1.0, std::abs(a))) {
        const double mid = 0.5 * (lo + hi);
        if (problem.domain.contains(a + mid, rk4_step(problem, a, x, u, mid))) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      tr.exited_domain = true;
      tr.exit_time = a + hi;
      if (lo > 0.0) {
        Vec xl = rk4_step(problem, a, x, u, lo);
        tr.slope_start.push_back(problem.f(a, x, u));
        tr.slope_end.push_back(problem.f(a + lo, xl, u));
        if (options.accumulate_cost) {
          tr.cost.push_back(tr.cost.back() + simpson_step_cost(problem, a, x, xl, u, lo));
        }
        tr.times.push_back(a + lo);
        tr.states.push_back(xl);
      }
      return tr;
    }

    tr.slope_start.push_back(problem.f(a, x, u));
    tr.slope_end.push_back(problem.f(b, x1, u));
    if (options.accumulate_cost) {
      tr.cost.push_back(tr.cost.back() + simpson_step_cost(problem, a, x, x1, u, h));
    }
    tr.times.push_back(b);
    tr.states.push_back(x1);
    x = std::move(x1);
  }
  return tr;
}

std::optional<double> first_hit_in_step(const ControlProblem& pr, double t, const Vec& x,
                                        const Vec& x1, const Vec& u, double h,
                                        const HitOptions& hit) {
  const double cap = hit.capture_radius;
  auto dist_at = [&](double s) {
    return pr.target.distance(t + s, s == 0.0 ? x : rk4_step(pr, t, x, u, s));
  };
  // Smallest s in (lo, hi] with distance <= cap, given dist(lo) > cap and
  // dist(hi) <= cap.
  auto halve = [&](double lo, double hi) {
    const double tol = 1e-14 * std::max(1.0, std::abs(t)) + 1e-16;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dist_at(mid) <= cap) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  };
  // The distance moves at most `rate` per unit time, so advancing by
  // (d - cap) / rate cannot jump over an earlier entry. Halving then
  // resolves the last short bracket.
  const double rate = 1.0 + 1.5 * std::max(pr.f(t, x, u).norm(), pr.f(t + h, x1, u).norm());
  auto bisect = [&](double lo, double hi) {
    double d = dist_at(lo);
    for (int it = 0; it < 1000 && d > cap; ++it) {
      const double next = lo + (d - cap) / rate;
      if (next >= hi) break;
      const double dn = dist_at(next);
      if (dn <= cap) return halve(lo, next);
      if (next - lo <= 1e-15 * std::max(1.0, std::abs(t))) break;
      lo = next;
      d = dn;
    }
    return halve(lo, hi);
  };

  if (pr.target.distance(t + h, x1) <= cap) {
    // Entry may still happen before an earlier sub-sample dip; march from
    // the step start.
    const int n = std::max(1, hit.subsamples);
    for (int j = 1; j < n; ++j) {
      const double s = h * j / n;
      if (dist_at(s) <= cap) return bisect(0.0, s);
    }
    return bisect(0.0, h);
  }

  const int n = std::max(2, hit.subsamples);
  const Vec f0 = pr.f(t, x, u);
  const Vec f1 = pr.f(t + h, x1, u);
  std::vector<double> ss(static_cast<std::size_t>(n) + 1);
  std::vector<double> ds(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    const double s = h * j / n;
    ss[static_cast<std::size_t>(j)] = s;
    const Vec xs = (j == 0) ? x : (j == n ? x1 : hermite(x, x1, f0, f1, h, s));
    ds[static_cast<std::size_t>(j)] = pr.target.distance(t + s, xs);
  }
  for (int j = 1; j < n; ++j) {
    if (ds[static_cast<std::size_t>(j)] <= cap) {
      const double s = ss[static_cast<std::size_t>(j)];
      if (dist_at(s) <= cap) return bisect(0.0, s);
    }
  }
  // Grazing approach: the distance may dip below cap between probes. March
  // through every probe interval where the rate bound allows a dip; if the
  // march stalls near a graze, golden-section search the remainder.
  const double sub = h / n;
  for (int j = 1; j <= n; ++j) {
    const double d0 = ds[static_cast<std::size_t>(j - 1)];
    const double d1 = ds[static_cast<std::size_t>(j)];
    if (0.5 * (d0 + d1 - rate * sub) > cap) continue;
    double lo = ss[static_cast<std::size_t>(j - 1)];
    double hi = ss[static_cast<std::size_t>(j)];
    double d = d0;
    bool stalled = true;
    for (int it = 0; it < 1000; ++it) {
      const double next = lo + (d - cap) / rate;
      if (next >= hi) {
        stalled = false;
        break;
      }
      const double dn = dist_at(next);
      if (dn <= cap) return halve(lo, next);
      lo = next;
      d = dn;
    }
    if (!stalled) continue;
    const double lo0 = lo;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - g * (hi - lo);
    double b = lo + g * (hi - lo);
    double da = dist_at(a);
    double db = dist_at(b);
    for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(t)); ++it) {
      if (da <= cap) return halve(lo0, a);
      if (da < db) {
        hi = b;
        b = a;
        db = da;
        a = hi - g * (hi - lo);
        da = dist_at(a);
      } else {
        lo = a;
        a = b;
        da = db;
        b = lo + g * (hi - lo);
        db = dist_at(b);
      }
    }
    if (db <= cap) return halve(lo0, b);
  }
  return std::nullopt;
}

BolzaOutcome bolza_cost(const ControlProblem& pr, const PiecewiseConstantControl& control,
                        double t0, const Vec& x0, double t_end, double step,
                        const HitOptions& hit) {
  BolzaOutcome out;
  if (!pr.domain.contains(t0, x0)) {
    throw PreconditionError("initial point outside the domain: " + describe({t0, x0}));
  }
  if (pr.target.contains(t0, x0) || pr.target.distance(t0, x0) <= hit.capture_radius) {
    out.hit = true;
    out.hit_time = t0;
    out.hit_state = x0;
    out.final_cost = pr.psi(t0, x0);
    out.total = out.final_cost;
    out.end_time = t0;
    out.end_state = x0;
    return out;
  }
  if (step <= 0.0) step = (t_end - t0) / 2000.0;
  const auto sched = step_schedule(control, t0, t_end, step);
  Vec x = x0;
  double J = 0.0;
  for (std::size_t i = 1; i < sched.size(); ++i) {
    const double a = sched[i - 1];
    const double h = sched[i] - a;
    const Vec& u = control(sched[i]);
    Vec x1 = rk4_step(pr, a, x, u, h);
    check_finite(x1, a);
    if (auto s = first_hit_in_step(pr, a, x, x1, u, h, hit)) {
      const Vec xs = rk4_step(pr, a, x, u, *s);
      J += simpson_step_cost(pr, a, x, xs, u, *s);
      out.hit = true;
      out.hit_time = a + *s;
      out.hit_state = xs;
      out.running_cost = J;
      out.final_cost = pr.psi(out.hit_time, xs);
      out.total = J + out.final_cost;
      out.end_time = out.hit_time;
      out.end_state = xs;
      return out;
    }
    if (!pr.domain.whole_space && !pr.domain.contains(a + h, x1)) {
      out.exited_domain = true;
      out.running_cost = J;
      out.end_time = a;
      out.end_state = x;
      return out;
    }
    J += simpson_step_cost(pr, a, x, x1, u, h);
    x = std::move(x1);
  }
  out.running_cost = J;
  out.end_time = sched.back();
  out.end_state = x;
  return out;
}

PiecewiseConstantControl approximate_control(const std::vector<std::pair<double, Vec>>& samples,
                                             const std::vector<double>& grid, double p,
                                             const ControlSetSpec& control_set,
                                             std::size_t control_samples) {
  if (grid.size() < 2) throw PreconditionError("control grid needs at least two points");
  if (samples.empty()) throw PreconditionError("no control samples");
  const std::size_t cells = grid.size() - 1;
  std::vector<std::vector<const Vec*>> per_cell(cells);
  for (const auto& [t, u] : samples) {
    if (t <= grid.front()) continue;
    if (t > grid.back()) continue;
    auto it = std::lower_bound(grid.begin() + 1, grid.end(), t);
    if (it == grid.end()) continue;
    per_cell[static_cast<std::size_t>(it - grid.begin()) - 1].push_back(&u);
  }
  std::vector<Vec> values;
  values.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& us = per_cell[c];
    if (us.empty()) {
      std::ostringstream os;
      os << "control cell " << c << " (" << grid[c] << ", " << grid[c + 1] << "] has no samples";
      throw PreconditionError(os.str());
    }
    const Eigen::Index q = us.front()->size();
    Vec v(q);
    if (p == 1.0) {
      // Componentwise median.
      for (Eigen::Index k = 0; k < q; ++k) {
        std::vector<double> comp;
        comp.reserve(us.size());
        for (const Vec* u : us) comp.push_back((*u)[k]);
        auto mid = comp.begin() + static_cast<std::ptrdiff_t>(comp.size() / 2);
        std::nth_element(comp.begin(), mid, comp.end());
        double med = *mid;
        if (comp.size() % 2 == 0) {
          med = 0.5 * (med + *std::max_element(comp.begin(), mid));
        }
        v[k] = med;
      }
    } else {
      v.setZero();
      for (const Vec* u : us) v += *u;
      v /= static_cast<double>(us.size());
    }
    values.push_back(control_set.project(v, control_samples));
  }
  return PiecewiseConstantControl(grid, std::move(values));
}

std::vector<DependenceRow> continuous_dependence_probe(
    const ControlProblem& problem, const PiecewiseConstantControl& control, double t0,
    const Vec& x0, double tf, const std::vector<double>& scales, double step,
    std::uint64_t seed) {
  const Trajectory base = integrate(problem, control, t0, x0, tf, step);
  if (base.exited_domain) throw PreconditionError("base trajectory leaves the domain");
  const double p = problem.control_norm_exponent;
  std::vector<DependenceRow> rows;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double s : scales) {
    DependenceRow row;
    row.scale = s;
    Vec dir(x0.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    const Vec dx0 = dir.norm() > 0.0 ? Vec(s * dir / dir.norm()) : Vec(Vec::Zero(x0.size()));
    std::vector<Vec> vals = control.values();
    double lp = 0.0;
    const auto& bp = control.breakpoints();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      Vec du(vals[i].size());
      for (Eigen::Index k = 0; k < du.size(); ++k) du[k] = s * unit(rng);
      vals[i] += du;
      const double lo = std::max(bp[i], t0);
      const double hi = std::min(bp[i + 1], tf);
      if (hi > lo) lp += std::pow(du.norm(), p) * (hi - lo);
    }
    row.perturbation = dx0.norm() + std::pow(lp, 1.0 / p);
    const PiecewiseConstantControl pert(bp, std::move(vals));
    const Vec xp0 = x0 + dx0;
    if (!problem.domain.contains(t0, xp0)) {
      row.exited = true;
      rows.push_back(row);
      continue;
    }
    const Trajectory tr = integrate(problem, pert, t0, xp0, tf, step);
    row.exited = tr.exited_domain;
    const std::size_t n = std::min(tr.size(), base.size());
    for (std::size_t k = 0; k < n; ++k) {
      row.sup_distance = std::max(row.sup_distance, (tr.states[k] - base.states[k]).norm());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hjbv
