#include "hjbverify/value.hpp"

#include "hjbverify/errors.hpp"
#include "hjbverify/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hjbv {

void write_value_csv(std::ostream& os, const GridField& field) {
  const GridSpec& g = field.grid;
  os << "t";
  for (int i = 0; i < g.dim(); ++i) os << ",x" << (i + 1);
  os << ",V\n";
  os.precision(17);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point p = g.point(k);
    os << p.t;
    for (int i = 0; i < g.dim(); ++i) os << "," << p.x[i];
    const double v = field.values[k];
    os << ",";
    if (std::isinf(v)) {
      os << (v > 0 ? "inf" : "-inf");
    } else {
      os << v;
    }
    os << "\n";
  }
}

namespace {

constexpr char kMagic[8] = {'H', 'J', 'B', 'V', 'G', 'R', 'I', 'D'};

template <class T>
void put_le(std::ostream& os, T v) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  os.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw Error("truncated value grid file");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_value_binary(std::ostream& os, const GridField& field) {
  const GridSpec& g = field.grid;
  os.write(kMagic, 8);
  put_le<std::uint32_t>(os, 1);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.space.size() + 1));
  auto axis = [&](const Axis& a) {
    put_le<double>(os, a.lo);
    put_le<double>(os, a.hi);
    put_le<std::uint64_t>(os, a.count);
  };
  axis(g.time);
  for (const Axis& a : g.space) axis(a);
  put_le<std::uint64_t>(os, field.values.size());
  for (double v : field.values) put_le<double>(os, v);
}

GridField read_value_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw Error("not a value grid file");
  if (get_le<std::uint32_t>(is) != 1) throw Error("unsupported value grid version");
  const auto axes = get_le<std::uint32_t>(is);
  if (axes < 1 || axes > kMaxDim + 1) throw Error("bad axis count in value grid file");
  GridSpec g;
  auto axis = [&]() {
    Axis a;
    a.lo = get_le<double>(is);
    a.hi = get_le<double>(is);
    a.count = get_le<std::uint64_t>(is);
    return a;
  };
  g.time = axis();
  for (std::uint32_t i = 1; i < axes; ++i) g.space.push_back(axis());
  const auto n = get_le<std::uint64_t>(is);
  if (n != g.size()) throw Error("value count does not match the axes");
  GridField f(g, 0.0);
  for (auto& v : f.values) v = get_le<double>(is);
  return f;
}

void check_brute_force_size(std::size_t pieces, std::size_t controls, std::size_t max_pieces,
                            std::size_t max_controls) {
  double total = std::pow(static_cast<double>(controls), static_cast<double>(pieces));
  if (pieces == 0 || controls == 0) throw PreconditionError("brute force needs m, k >= 1");
  if (pieces > max_pieces || total > static_cast<double>(max_controls)) {
    std::ostringstream os;
    os << "brute-force search of " << controls << "^" << pieces << " = " << total
       << " controls exceeds the guard (m <= " << max_pieces << ", k^m <= " << max_controls
       << ")";
    throw SizeGuardError(os.str());
  }
}

BruteForceResult brute_force_value(const ControlProblem& problem, double t0, const Vec& x0,
                                   const BruteForceOptions& opt) {
  const auto controls = problem.control_set.sample(opt.control_samples);
  check_brute_force_size(opt.pieces, controls.size(), opt.max_pieces, opt.max_controls);
  if (!problem.domain.contains(t0, x0)) {
    throw PreconditionError("initial point outside the domain: " + describe({t0, x0}));
  }
  if (!(opt.horizon > t0)) throw PreconditionError("brute force horizon must exceed t0");

  std::size_t total = 1;
  for (std::size_t i = 0; i < opt.pieces; ++i) total *= controls.size();
  const double step = opt.step > 0.0 ? opt.step : (opt.horizon - t0) / 2000.0;
  HitOptions hit;
  hit.capture_radius = opt.capture_radius;

  std::vector<BolzaOutcome> outcomes(total);
  auto control_of = [&](std::size_t code) {
    std::vector<Vec> vals(opt.pieces);
    for (std::size_t j = opt.pieces; j-- > 0;) {
      vals[j] = controls[code % controls.size()];
      code /= controls.size();
    }
    return PiecewiseConstantControl::uniform(t0, opt.horizon, std::move(vals));
  };
  parallel_for(total, [&](std::size_t code) {
    outcomes[code] = bolza_cost(problem, control_of(code), t0, x0, opt.horizon, step, hit);
  });

  BruteForceResult res;
  res.evaluated = total;
  res.horizon = opt.horizon;
  for (std::size_t code = 0; code < total; ++code) {
    if (!outcomes[code].hit) continue;
    ++res.hitting;
    if (outcomes[code].total < res.value) {
      res.value = outcomes[code].total;
      res.outcome = outcomes[code];
      res.best = control_of(code);
    }
  }
  return res;
}

BruteForceResult brute_force_value_scan(const ControlProblem& problem, double t0, const Vec& x0,
                                        BruteForceOptions options,
                                        const std::vector<double>& horizons) {
  BruteForceResult best;
  for (double T : horizons) {
    options.horizon = T;
    BruteForceResult r = brute_force_value(problem, t0, x0, options);
    best.evaluated += r.evaluated;
    best.hitting += r.hitting;
    if (r.value < best.value) {
      const auto ev = best.evaluated;
      const auto hi = best.hitting;
      best = r;
      best.evaluated = ev;
      best.hitting = hi;
    }
  }
  return best;
}

double dp_backup(const ControlProblem& problem, const GridSpec& grid, const double* next_layer,
                 double t, const Vec& x, double dt, const std::vector<Vec>& controls,
                 std::int32_t* argmin, std::size_t* losses) {
  double best = kInf;
  std::int32_t arg = -1;
  for (std::size_t j = 0; j < controls.size(); ++j) {
    const Vec& u = controls[j];
    const Vec foot = x + dt * problem.f(t, x, u);
    const auto next = interpolate_layer(grid, next_layer, foot);
    if (!next) {
      if (losses) ++*losses;
      continue;
    }
    if (std::isinf(*next)) continue;
    const double v = dt * problem.L(t, x, u) + *next;
    if (v < best) {
      best = v;
      arg = static_cast<std::int32_t>(j);
    }
  }
  if (argmin) *argmin = arg;
  return best;
}

ValueGrid dp_value_grid(const ControlProblem& problem, const GridSpec& grid,
                        const DpOptions& options) {
  if (grid.time.count < 2) throw PreconditionError("dp grid needs at least two time layers");
  ValueGrid V;
  static_cast<GridField&>(V) = GridField(grid, kInf);
  V.policy.assign(grid.size(), -1);
  V.controls = problem.control_set.sample(options.control_samples);
  V.capture_radius = options.capture_radius > 0.0 ? options.capture_radius : 0.5 * grid.mesh();
  const std::size_t ls = grid.layer_size();
  const std::size_t last = grid.time.count - 1;

  const double T = grid.time.at(last);
  for (std::size_t li = 0; li < ls; ++li) {
    const Vec x = grid.state(li);
    if (!problem.domain.whole_space && !problem.domain.contains(T, x)) {
      throw PreconditionError("terminal layer leaves the domain at " + describe({T, x}));
    }
    if (problem.target.distance(T, x) <= V.capture_radius) V.at(last, li) = problem.psi(T, x);
  }

  std::vector<std::size_t> losses(ls, 0);
  for (std::size_t it = last; it-- > 0;) {
    const double t = grid.time.at(it);
    const double dt = grid.time.at(it + 1) - t;
    const double* next = V.layer(it + 1);
    parallel_for(ls, [&](std::size_t li) {
      const Vec x = grid.state(li);
      const std::size_t k = grid.flat(it, li);
      if (problem.target.distance(t, x) <= V.capture_radius) {
        V.values[k] = problem.psi(t, x);
        return;
      }
      V.values[k] = dp_backup(problem, grid, next, t, x, dt, V.controls, &V.policy[k], &losses[li]);
    });
  }
  for (std::size_t l : losses) V.boundary_losses += l;
  return V;
}

ValueGrid value_iteration(const ControlProblem& problem, const GridSpec& space_grid,
                          const ValueIterationOptions& opt) {
  GridSpec grid = space_grid;
  grid.time = Axis{opt.time, opt.time, 1};
  ValueGrid V;
  static_cast<GridField&>(V) = GridField(grid, opt.cap_value);
  V.policy.assign(grid.size(), -1);
  V.controls = problem.control_set.sample(opt.control_samples);
  const double dt = opt.dt > 0.0 ? opt.dt : 4.0 * grid.state_mesh();
  const std::size_t ls = grid.layer_size();
  const int n = grid.dim();

  std::vector<Vec> states(ls);
  for (std::size_t li = 0; li < ls; ++li) states[li] = grid.state(li);
  // Default capture: one cell diagonal, so every cell touching the target
  // has a fixed corner.
  V.capture_radius = opt.capture_radius > 0.0
                         ? opt.capture_radius
                         : grid.state_mesh() * std::sqrt(static_cast<double>(n));

  std::vector<char> fixed(ls, 0);
  for (std::size_t li = 0; li < ls; ++li) {
    if (problem.target.distance(opt.time, states[li]) <= V.capture_radius) {
      fixed[li] = 1;
      V.values[li] = problem.psi(opt.time, states[li]);
    }
  }

  // Precompute feet and their interpolation stencils.
  const std::size_t k = V.controls.size();
  std::vector<double> run_cost(ls * k);
  std::vector<char> inside(ls * k);
  std::vector<Vec> feet(ls * k);
  std::vector<double> arrival(ls * k, std::numeric_limits<double>::quiet_NaN());
  HitOptions hit;
  hit.capture_radius = V.capture_radius;
  for (std::size_t li = 0; li < ls; ++li) {
    for (std::size_t j = 0; j < k; ++j) {
      const Vec& u = V.controls[j];
      feet[li * k + j] = rk4_step(problem, opt.time, states[li], u, dt);
      run_cost[li * k + j] =
          simpson_step_cost(problem, opt.time, states[li], feet[li * k + j], u, dt);
      inside[li * k + j] = grid.window().contains(opt.time, feet[li * k + j]) ? 1 : 0;
      // A step that reaches the target ends there: exact arrival cost, no
      // interpolation.
      if (auto s = first_hit_in_step(problem, opt.time, states[li], feet[li * k + j], u, dt, hit)) {
        const Vec xs = rk4_step(problem, opt.time, states[li], u, *s);
        arrival[li * k + j] = simpson_step_cost(problem, opt.time, states[li], xs, u, *s) +
                              problem.psi(opt.time + *s, xs);
        inside[li * k + j] = 1;
      }
      if (!inside[li * k + j]) ++V.boundary_losses;
    }
  }

  std::vector<std::size_t> dims(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) dims[static_cast<std::size_t>(a)] = grid.space[static_cast<std::size_t>(a)].count;
  const std::size_t orders = std::size_t{1} << n;
  V.converged = false;
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    const std::size_t order = sweep % orders;
    double change = 0.0;
    std::vector<std::size_t> c(static_cast<std::size_t>(n));
    for (std::size_t visit = 0; visit < ls; ++visit) {
      std::size_t rem = visit;
      for (std::size_t a = static_cast<std::size_t>(n); a-- > 0;) {
        std::size_t ci = rem % dims[a];
        rem /= dims[a];
        c[a] = ((order >> a) & 1U) ? dims[a] - 1 - ci : ci;
      }
      const std::size_t li = grid.layer_index(c);
      if (fixed[li]) continue;
      double best = opt.cap_value;
      std::int32_t arg = -1;
      for (std::size_t j = 0; j < k; ++j) {
        if (!inside[li * k + j]) continue;
        const double a = arrival[li * k + j];
        const double v = std::isnan(a)
                             ? run_cost[li * k + j] +
                                   *interpolate_layer(grid, V.values.data(), feet[li * k + j])
                             : a;
        if (v < best) {
          best = v;
          arg = static_cast<std::int32_t>(j);
        }
      }
      change = std::max(change, std::abs(best - V.values[li]));
      V.values[li] = best;
      V.policy[li] = arg;
    }
    V.sweeps = sweep + 1;
    if (change < opt.tol) {
      V.converged = true;
      break;
    }
  }
  for (std::size_t li = 0; li < ls; ++li) {
    if (V.values[li] >= opt.cap_value) {
      V.values[li] = kInf;
      V.policy[li] = -1;
    }
  }
  return V;
}

SynthesisResult value_from_synthesis(const ControlProblem& problem, const Feedback& feedback,
                                     double t0, const Vec& x0, const SynthesisOptions& opt) {
  if (!(opt.cutoff > 0.0)) throw PreconditionError("chattering cutoff must be positive");
  SynthesisResult res;
  auto finish = [&](double t, const Vec& x, double J) {
    Point near = problem.target.nearest ? problem.target.nearest(t, x) : Point{t, x};
    res.converged = true;
    res.running_cost = J;
    res.final_cost = problem.psi(near.t, near.x);
    res.value = J + res.final_cost;
    res.end_time = t;
    res.end_state = x;
    return res;
  };
  if (problem.target.contains(t0, x0) || problem.target.distance(t0, x0) <= opt.cutoff) {
    return finish(t0, x0, 0.0);
  }
  HitOptions hit;
  hit.capture_radius = opt.cutoff;
  double t = t0;
  Vec x = x0;
  double J = 0.0;
  const double t_end = t0 + opt.max_time;
  bool have_prev = false;
  Vec prev_u;
  // Sliding pair: each control of the pair drives the state into the other's
  // region. Motion then follows the equivalent control on the segment [a, b].
  bool sliding = false;
  Vec slide_a, slide_b;
  auto region_after = [&](const Vec& c, double h) {
    return feedback(t + h, rk4_step(problem, t, x, c, h));
  };
  auto pushes_across = [&](const Vec& a, const Vec& b, double h) {
    return region_after(a, h) == b && region_after(b, h) == a;
  };
  while (t < t_end) {
    double h = std::min(opt.step, t_end - t);
    Vec u = feedback(t, x);
    if (sliding && !pushes_across(slide_a, slide_b, h)) sliding = false;
    if (!sliding && have_prev && u != prev_u) {
      const double probe = std::min(h, 1e-3 * opt.step);
      if (pushes_across(prev_u, u, probe)) {
        res.switch_times.push_back(t);
        sliding = true;
        slide_a = prev_u;
        slide_b = u;
      }
    }
    if (sliding) {
      // weight on slide_a; too much of it ends the step in the region of slide_b
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec um = mid * slide_a + (1.0 - mid) * slide_b;
        if (region_after(um, h) == slide_b) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      u = 0.5 * (lo + hi) * slide_a + (1.0 - 0.5 * (lo + hi)) * slide_b;
      res.sliding_time += h;
    } else {
      if (have_prev && u != prev_u) res.switch_times.push_back(t);
      prev_u = u;
      have_prev = true;
    }
    Vec x1 = rk4_step(problem, t, x, u, h);
    if (!x1.allFinite()) throw BlowupError("closed-loop integration blew up", t);
    if (!sliding && feedback(t + h, x1) != u) {
      double lo = 0.0;
      double hi = h;
      while (hi - lo > opt.switch_tol) {
        const double mid = 0.5 * (lo + hi);
        if (feedback(t + mid, rk4_step(problem, t, x, u, mid)) == u) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      if (hi > opt.switch_tol) {
        h = hi;
        x1 = rk4_step(problem, t, x, u, h);
      }
    }
    if (auto s = first_hit_in_step(problem, t, x, x1, u, h, hit)) {
      const Vec xs = rk4_step(problem, t, x, u, *s);
      J += simpson_step_cost(problem, t, x, xs, u, *s);
      ++res.steps;
      return finish(t + *s, xs, J);
    }
    if (!problem.domain.whole_space && !problem.domain.contains(t + h, x1)) break;
    J += simpson_step_cost(problem, t, x, x1, u, h);
    t += h;
    x = std::move(x1);
    ++res.steps;
  }
  res.converged = false;
  res.value = kInf;
  res.running_cost = J;
  res.end_time = t;
  res.end_state = x;
  return res;
}

}  // namespace hjbv
