#include "hjbverify_cli/cli.hpp"

#include <hjbverify/errors.hpp>
#include <hjbverify/report.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace hjbv::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v == 0.0 ? 0.0 : v;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

struct IoError : Error {
  using Error::Error;
};

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string command;
  std::string problem;
  std::string theorem;  // empty: the entry's theorem
  double eps = 0.01;
  double g_l1 = -1.0;  // < 0: length of the window's time range
  std::vector<double> grid;
  double mesh = 0.0;
  double dt = 0.0;
  double tol_hjb = -1.0;
  double tol_target = -1.0;
  double tol_boundary = -1.0;
  double tol_ndj = -1.0;
  double tol_liminf = -1.0;
  double exclusion = -1.0;
  std::string boundary_mode;
  bool check_all = false;
  bool no_check_all = false;
  std::size_t control_samples = 0;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::vector<std::string> param;
  bool print_defaults = false;

  std::string method = "synthesis";
  std::vector<double> start;
  double t0 = std::nan("");
  std::size_t pieces = 0;
  std::size_t samples = 0;
  double horizon = 0.0;
  double step = 0.0;
  double capture = 0.0;
  double resolution = 0.0;
  std::size_t points = 20;

  double lo = 0.3;
  double hi = 0.6;
  std::size_t count = 200;
};

std::string normalize(std::string key) {
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  return key;
}

// Config values; flags given on the command line override them afterwards.
void load_config(const std::string& path, Options& o) {
  toml::table tbl;
  try {
    tbl = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "cannot read config " << path << ": " << e.description();
    throw UsageError(os.str());
  }
  auto real_list = [](const toml::array& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(x.value<double>().value_or(std::nan("")));
    return v;
  };
  for (const auto& [k, node] : tbl) {
    const std::string key = normalize(std::string(k.str()));
    auto d = [&] {
      auto v = node.value<double>();
      if (!v) throw UsageError("config key '" + key + "' needs a number");
      return *v;
    };
    auto s = [&] {
      auto v = node.value<std::string>();
      if (!v) throw UsageError("config key '" + key + "' needs a string");
      return *v;
    };
    auto n = [&] { return static_cast<std::size_t>(d()); };
    if (key == "problem") o.problem = s();
    else if (key == "theorem") o.theorem = s();
    else if (key == "eps") o.eps = d();
    else if (key == "g_l1") o.g_l1 = d();
    else if (key == "grid" && node.is_array()) o.grid = real_list(*node.as_array());
    else if (key == "mesh") o.mesh = d();
    else if (key == "dt") o.dt = d();
    else if (key == "tol_hjb") o.tol_hjb = d();
    else if (key == "tol_target") o.tol_target = d();
    else if (key == "tol_boundary") o.tol_boundary = d();
    else if (key == "tol_ndj") o.tol_ndj = d();
    else if (key == "tol_liminf") o.tol_liminf = d();
    else if (key == "exclusion_radius") o.exclusion = d();
    else if (key == "boundary_mode") o.boundary_mode = s();
    else if (key == "check_all") o.check_all = node.value<bool>().value_or(false);
    else if (key == "control_samples") o.control_samples = n();
    else if (key == "seed") o.seed = static_cast<std::uint64_t>(d());
    else if (key == "out") o.out = s();
    else if (key == "method") o.method = s();
    else if (key == "start" && node.is_array()) o.start = real_list(*node.as_array());
    else if (key == "t0") o.t0 = d();
    else if (key == "pieces") o.pieces = n();
    else if (key == "samples") o.samples = n();
    else if (key == "horizon") o.horizon = d();
    else if (key == "step") o.step = d();
    else if (key == "capture_radius") o.capture = d();
    else if (key == "resolution") o.resolution = d();
    else if (key == "points") o.points = n();
    else if (key == "lo") o.lo = d();
    else if (key == "hi") o.hi = d();
    else if (key == "count") o.count = n();
    else if (key == "params" && node.is_table()) {
      for (const auto& [pk, pv] : *node.as_table()) {
        auto v = pv.value<double>();
        if (!v) throw UsageError("parameter '" + std::string(pk.str()) + "' needs a number");
        std::ostringstream os;
        os.precision(17);
        os << pk.str() << '=' << *v;
        o.param.push_back(os.str());
      }
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
}

GalleryParams parse_params(const std::vector<std::string>& items) {
  GalleryParams p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + item + "'");
    try {
      p[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--param value is not a number: '" + item + "'");
    }
  }
  return p;
}

GalleryEntry load_entry(const Options& o) {
  if (o.problem.empty()) throw UsageError("--problem is required");
  try {
    return gallery_entry(o.problem, parse_params(o.param));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + o.out);
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body,
                bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot write " + path.string());
  body(os);
  os.flush();
  if (!os) throw IoError("cannot write " + path.string());
}

Point start_point(const GalleryEntry& e, const Options& o) {
  const auto n = static_cast<std::size_t>(e.problem.dim);
  Point p;
  if (o.start.size() == n + 1) {
    p.t = o.start[0];
    p.x = Vec(e.problem.dim);
    for (std::size_t i = 0; i < n; ++i) p.x[static_cast<Eigen::Index>(i)] = o.start[i + 1];
  } else if (o.start.size() == n) {
    p.t = e.window.t_lo;
    p.x = Vec(e.problem.dim);
    for (std::size_t i = 0; i < n; ++i) p.x[static_cast<Eigen::Index>(i)] = o.start[i];
  } else {
    throw UsageError("--start expects " + std::to_string(n) + " state values, optionally preceded by t0");
  }
  if (!std::isnan(o.t0)) p.t = o.t0;
  return p;
}

Theorem parse_theorem(const std::string& s) {
  if (s == "teo1") return Theorem::teo1;
  if (s == "teo2") return Theorem::teo2;
  if (s == "eps") return Theorem::corollary_eps;
  throw UsageError("--theorem must be teo1, teo2 or eps");
}

json control_json(const PiecewiseConstantControl& u) {
  json values = json::array();
  for (const Vec& v : u.values()) values.push_back(vec_json(v));
  json bp = json::array();
  for (double t : u.breakpoints()) bp.push_back(num(t));
  return json{{"breakpoints", bp}, {"values", values}};
}

json defaults_json(const Options& o) {
  HypothesisCheckSpec s;
  Tolerances tol;
  BruteForceOptions b;
  SynthesisOptions syn;
  ValueIterationOptions vi;
  json g;
  g["dist_tol"] = tol.dist_tol;
  g["grad_tol"] = tol.grad_tol;
  g["h_grad"] = tol.h_grad;
  g["hjb_tol"] = s.hjb_tol;
  g["target_tol"] = s.target_tol;
  g["boundary_tol"] = s.boundary_tol;
  g["ndj_tol"] = s.ndj_tol;
  g["liminf_tol"] = s.liminf_tol;
  g["exclusion_radius"] = "2 x state mesh";
  g["control_samples"] = s.control_samples;
  g["ndj_trajectories"] = s.ndj_trajectories;
  g["ndj_steps"] = s.ndj_steps;
  g["ndj_offsets"] = s.ndj_offsets;
  g["liminf_points"] = s.liminf_points;
  g["liminf_annuli"] = s.liminf_annuli;
  g["liminf_samples"] = s.liminf_samples;
  g["liminf_quantile"] = s.liminf_quantile;
  g["target_samples"] = s.target_samples;
  g["boundary_samples"] = s.boundary_samples;
  g["seed"] = s.seed;
  g["eps"] = 0.01;
  g["brute"] = json{{"pieces", b.pieces},
                    {"control_samples", b.control_samples},
                    {"max_pieces", b.max_pieces},
                    {"max_controls", b.max_controls},
                    {"capture_radius", b.capture_radius},
                    {"step", "(T - t0) / 2000"}};
  g["synthesis"] = json{{"step", syn.step},
                        {"cutoff", syn.cutoff},
                        {"max_time", syn.max_time},
                        {"switch_tol", syn.switch_tol}};
  g["value_iteration"] = json{{"control_samples", vi.control_samples},
                              {"cap_value", vi.cap_value},
                              {"max_sweeps", vi.max_sweeps},
                              {"tol", vi.tol}};
  g["compare_points"] = o.points;
  json out;
  out["global"] = g;
  if (!o.problem.empty()) {
    GalleryEntry e = load_entry(o);
    HypothesisCheckSpec es = e.check_spec();
    json p;
    p["theorem"] = to_string(e.theorem);
    p["window"] = json{{"t", {e.window.t_lo, e.window.t_hi}},
                       {"x_lo", vec_json(e.window.x_lo)},
                       {"x_hi", vec_json(e.window.x_hi)}};
    p["mesh"] = e.mesh;
    p["dt"] = es.grid.time.step();
    p["exclusion_radius"] = es.exclusion_radius;
    p["hjb_tol"] = es.hjb_tol;
    p["ndj_tol"] = es.ndj_tol;
    p["check_all"] = es.check_all;
    p["value_mesh"] = e.value_mesh;
    p["brute"] = json{{"pieces", e.brute.pieces},
                      {"control_samples", e.brute.control_samples},
                      {"capture_radius", e.brute.capture_radius},
                      {"duration", e.brute_duration}};
    p["compare_methods"] = e.compare_methods;
    p["compare_slack"] = e.compare_slack;
    p["compare_rel_slack"] = e.compare_rel_slack;
    json params = json::object();
    for (const auto& [k, v] : e.params) params[k] = v;
    p["params"] = params;
    p["notes"] = e.notes;
    out["problem"] = json{{e.name, p}};
  }
  return out;
}

int cmd_verify(const Options& o, std::ostream& out) {
  GalleryEntry e = load_entry(o);
  const double mesh = o.mesh > 0.0 ? o.mesh : e.mesh;
  HypothesisCheckSpec spec = e.check_spec(mesh, o.dt);
  if (!o.grid.empty()) {
    const auto n = static_cast<std::size_t>(e.problem.dim);
    if (o.grid.size() != 2 + 2 * n) {
      throw UsageError("--grid expects tmin tmax, then " + std::to_string(n) + " lower and " +
                       std::to_string(n) + " upper state bounds");
    }
    Box b;
    b.t_lo = o.grid[0];
    b.t_hi = o.grid[1];
    b.x_lo = Vec(e.problem.dim);
    b.x_hi = Vec(e.problem.dim);
    for (std::size_t i = 0; i < n; ++i) {
      b.x_lo[static_cast<Eigen::Index>(i)] = o.grid[2 + i];
      b.x_hi[static_cast<Eigen::Index>(i)] = o.grid[2 + n + i];
    }
    const double dt = o.dt > 0.0 ? o.dt : spec.grid.time.step() > 0.0 ? spec.grid.time.step() : mesh;
    spec.grid = GridSpec::from_window(b, mesh, dt);
  }
  if (o.tol_hjb > 0.0) spec.hjb_tol = o.tol_hjb;
  if (o.tol_target > 0.0) spec.target_tol = o.tol_target;
  if (o.tol_boundary > 0.0) spec.boundary_tol = o.tol_boundary;
  if (o.tol_ndj > 0.0) spec.ndj_tol = o.tol_ndj;
  if (o.tol_liminf > 0.0) spec.liminf_tol = o.tol_liminf;
  if (o.exclusion > 0.0) {
    spec.exclusion_radius = o.exclusion;
  } else if (o.mesh > 0.0 || !o.grid.empty()) {
    spec.exclusion_radius = 2.0 * spec.grid.state_mesh();
  }
  if (!o.boundary_mode.empty()) {
    if (o.boundary_mode == "strict") spec.boundary_mode = BoundaryMode::strict_levelset;
    else if (o.boundary_mode == "liminf") spec.boundary_mode = BoundaryMode::remark_liminf;
    else throw UsageError("--boundary-mode must be strict or liminf");
  }
  if (o.check_all) spec.check_all = true;
  if (o.no_check_all) spec.check_all = false;
  if (o.control_samples > 0) spec.control_samples = o.control_samples;
  spec.seed = o.seed;
  const Theorem th = o.theorem.empty() ? e.theorem : parse_theorem(o.theorem);
  spec.theorem = th;
  double g_l1 = 0.0;
  if (th == Theorem::corollary_eps) {
    if (o.eps < 0.0) throw UsageError("--eps must be non-negative");
    spec.eps = o.eps;
    spec.g = [](double) { return 1.0; };
    const Box w = spec.grid.window();
    g_l1 = o.g_l1 >= 0.0 ? o.g_l1 : w.t_hi - w.t_lo;
    spec.g_l1 = g_l1;
  }

  const fs::path dir = prepare_out(o);
  VerificationReport rep;
  if (th == Theorem::teo2) {
    rep = check_infinite_horizon(e.candidate, e.problem, spec, e.horizons, e.probes);
  } else {
    rep = check_hypotheses(e.candidate, e.problem, spec);
  }
  write_file(dir / "report.json", [&](std::ostream& os) { os << report_to_json(rep) << '\n'; });
  write_file(dir / "residuals.csv", [&](std::ostream& os) { write_residuals_csv(os, rep); });

  json summary;
  summary["problem"] = e.name;
  summary["theorem"] = to_string(th);
  summary["conclusion"] = rep.conclusion ? "pass" : "fail";
  summary["resolution_note"] = rep.resolution_note;
  json hyps = json::object();
  for (const auto& h : rep.hypotheses) hyps[h.id] = to_string(h.verdict);
  summary["hypotheses"] = hyps;
  if (th == Theorem::corollary_eps) {
    Certificate c = corollary_eps_bound(rep, spec.eps, g_l1);
    summary["certificate"] = json{{"certified", c.certified}, {"bound", num(c.bound)}, {"text", c.text}};
  }
  summary["seed"] = o.seed;
  summary["report"] = (dir / "report.json").string();
  summary["residuals"] = (dir / "residuals.csv").string();
  out << summary.dump(2) << '\n';
  return rep.conclusion ? kOk : kFail;
}

int cmd_value(const Options& o, std::ostream& out) {
  GalleryEntry e = load_entry(o);
  json res;
  res["problem"] = e.name;
  res["method"] = o.method;
  if (o.method == "brute") {
    BruteForceOptions b = e.brute;
    if (o.pieces > 0) b.pieces = o.pieces;
    if (o.samples > 0) b.control_samples = o.samples;
    if (o.step > 0.0) b.step = o.step;
    if (o.capture > 0.0) b.capture_radius = o.capture;
    // Size guard before anything else.
    check_brute_force_size(b.pieces, e.problem.control_set.sample(b.control_samples).size(),
                           b.max_pieces, b.max_controls);
    if (o.start.empty()) throw UsageError("--start is required for brute force");
    const Point s = start_point(e, o);
    BruteForceResult r;
    if (o.horizon > 0.0) {
      b.horizon = s.t + o.horizon;
      r = brute_force_value(e.problem, s.t, s.x, b);
    } else {
      double base = e.brute_duration;
      std::vector<double> hs;
      if (!e.brute_horizon_factors.empty()) {
        if (e.synthesis) {
          SynthesisResult syn = value_from_synthesis(e.problem, *e.synthesis, s.t, s.x, e.synthesis_options);
          if (syn.converged && syn.end_time > s.t) base = syn.end_time - s.t;
        }
        for (double f : e.brute_horizon_factors) hs.push_back(s.t + f * base);
      } else {
        hs.push_back(s.t + base);
      }
      r = brute_force_value_scan(e.problem, s.t, s.x, b, hs);
    }
    res["start"] = json{{"t", s.t}, {"x", vec_json(s.x)}};
    res["value"] = num(r.value);
    res["horizon"] = num(r.horizon);
    res["pieces"] = b.pieces;
    res["control_samples"] = b.control_samples;
    res["evaluated"] = r.evaluated;
    res["hitting"] = r.hitting;
    res["hit_time"] = num(r.outcome.hit_time);
    if (r.best) res["best_control"] = control_json(*r.best);
  } else if (o.method == "dp") {
    const double mesh = o.resolution > 0.0 ? o.resolution : e.value_mesh;
    ValueGrid g = entry_value_grid(e, mesh);
    const fs::path dir = prepare_out(o);
    write_file(dir / "value_grid.csv", [&](std::ostream& os) { write_value_csv(os, g); });
    write_file(dir / "value_grid.bin", [&](std::ostream& os) { write_value_binary(os, g); }, true);
    res["mesh"] = mesh;
    res["points"] = g.values.size();
    res["boundary_losses"] = g.boundary_losses;
    res["sweeps"] = g.sweeps;
    res["converged"] = g.converged;
    if (!o.start.empty()) {
      const Point s = start_point(e, o);
      res["start"] = json{{"t", s.t}, {"x", vec_json(s.x)}};
      res["value"] = num(lookup(g, s.t, s.x));
    }
    res["csv"] = (dir / "value_grid.csv").string();
    res["binary"] = (dir / "value_grid.bin").string();
  } else if (o.method == "synthesis") {
    if (!e.synthesis) throw UsageError("problem '" + e.name + "' carries no synthesis");
    if (o.start.empty()) throw UsageError("--start is required for synthesis");
    const Point s = start_point(e, o);
    SynthesisOptions so = e.synthesis_options;
    if (o.step > 0.0) so.step = o.step;
    SynthesisResult r = value_from_synthesis(e.problem, *e.synthesis, s.t, s.x, so);
    res["start"] = json{{"t", s.t}, {"x", vec_json(s.x)}};
    res["value"] = num(r.value);
    res["converged"] = r.converged;
    res["end_time"] = num(r.end_time);
    res["switches"] = r.switch_times.size();
    res["steps"] = r.steps;
  } else if (o.method == "rollout") {
    if (!e.rollout) throw UsageError("problem '" + e.name + "' carries no rollout control");
    if (o.start.empty()) throw UsageError("--start is required for rollout");
    const Point s = start_point(e, o);
    GalleryEntry single = e;
    single.compare_methods = {"rollout"};
    res["start"] = json{{"t", s.t}, {"x", vec_json(s.x)}};
    res["value"] = num(estimate_value(single, s.t, s.x).vhat);
    res["duration"] = e.rollout_duration;
  } else {
    throw UsageError("--method must be brute, dp, synthesis or rollout");
  }
  res["seed"] = o.seed;
  out << res.dump(2) << '\n';
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  GalleryEntry e = load_entry(o);
  CompareResult r = compare_points(e, o.points, o.seed, o.resolution);
  const fs::path dir = prepare_out(o);
  write_file(dir / "compare.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "t";
    for (int i = 0; i < e.problem.dim; ++i) os << ",x" << (i + 1);
    os << ",W";
    for (const auto& m : e.compare_methods) os << ',' << m;
    os << ",vhat,diff,slack\n";
    for (const auto& row : r.rows) {
      os << row.point.t;
      for (Eigen::Index i = 0; i < row.point.x.size(); ++i) os << ',' << row.point.x[i];
      os << ',' << row.W;
      for (const auto& m : e.compare_methods) {
        auto it = row.estimates.by_method.find(m);
        os << ',' << (it == row.estimates.by_method.end() ? std::nan("") : it->second);
      }
      os << ',' << row.estimates.vhat << ',' << row.diff << ',' << row.slack << '\n';
    }
  });
  json res;
  res["problem"] = e.name;
  res["points"] = r.rows.size();
  res["methods"] = e.compare_methods;
  res["max_diff"] = num(r.max_diff);
  res["slack"] = e.compare_slack;
  res["rel_slack"] = e.compare_rel_slack;
  res["pass"] = r.pass;
  if (!r.divergence.empty()) {
    json d = json::array();
    for (const auto& row : r.divergence) {
      d.push_back(json{{"budget", num(row.budget)}, {"cost", num(row.cost)}, {"hit", row.hit}});
    }
    res["divergence"] = d;
    res["certificate"] = nullptr;
    res["note"] = "costs keep decreasing with the budget: the value is not bounded below";
  }
  res["seed"] = o.seed;
  res["table"] = (dir / "compare.csv").string();
  out << res.dump(2) << '\n';
  return r.pass ? kOk : kFail;
}

int cmd_fuller_scan(const Options& o, std::ostream& out) {
  FullerScan scan = (o.lo == 0.3 && o.hi == 0.6 && o.count == 200)
                        ? fuller_default_scan()
                        : fuller_scan(o.lo, o.hi, o.count);
  const fs::path dir = prepare_out(o);
  write_file(dir / "fuller_scan.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "c,cost\n";
    for (std::size_t i = 0; i < scan.c.size(); ++i) os << scan.c[i] << ',' << scan.cost[i] << '\n';
  });
  std::size_t minima = 0;
  for (std::size_t i = 0; i < scan.c.size(); ++i) {
    const bool left = i == 0 || scan.cost[i] < scan.cost[i - 1];
    const bool right = i + 1 == scan.c.size() || scan.cost[i] < scan.cost[i + 1];
    if (left && right) ++minima;
  }
  json res;
  res["count"] = scan.c.size();
  res["best_c"] = scan.best_c;
  res["best_cost"] = scan.best_cost;
  res["scan_argmin"] = scan.c[scan.argmin];
  res["local_minima"] = minima;
  res["unimodal"] = minima == 1;
  res["table"] = (dir / "fuller_scan.csv").string();
  out << res.dump(2) << '\n';
  return kOk;
}

void add_shared(CLI::App* app, Options& o) {
  app->add_option("--problem", o.problem, "Gallery problem name");
  app->add_option("--config", "TOML file with the same keys as the flags");
  app->add_option("--param", o.param, "Problem parameter override key=value");
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--out", o.out, "Output directory");
  app->add_flag("--print-defaults", o.print_defaults, "Print the defaults table and exit");
}

}  // namespace

double lookup(const ValueGrid& g, double t, const Vec& x) {
  const Axis& ta = g.grid.time;
  if (ta.count == 1) return interpolate_layer(g.grid, g.layer(0), x).value_or(kInf);
  if (t < ta.lo || t > ta.hi) return kInf;
  const double pos = (t - ta.lo) / ta.step();
  const auto i = std::min(static_cast<std::size_t>(pos), ta.count - 2);
  const double w = pos - static_cast<double>(i);
  const double v0 = interpolate_layer(g.grid, g.layer(i), x).value_or(kInf);
  if (w == 0.0) return v0;
  const double v1 = interpolate_layer(g.grid, g.layer(i + 1), x).value_or(kInf);
  if (w == 1.0) return v1;
  if (v0 == kInf || v1 == kInf) return kInf;
  return (1.0 - w) * v0 + w * v1;
}

ValueGrid entry_value_grid(const GalleryEntry& e, double mesh) {
  if (e.autonomous) {
    Box b = e.window;
    b.t_hi = b.t_lo;
    ValueIterationOptions vi = e.vi;
    vi.time = e.window.t_lo;
    return value_iteration(e.problem, GridSpec::from_window(b, mesh), vi);
  }
  return dp_value_grid(e.problem, GridSpec::from_window(e.window, mesh, mesh), e.dp);
}

Estimates estimate_value(const GalleryEntry& e, double t0, const Vec& x0, const ValueGrid* dp) {
  Estimates est;
  std::optional<SynthesisResult> syn;
  auto synthesis = [&]() -> const SynthesisResult& {
    if (!syn) syn = value_from_synthesis(e.problem, *e.synthesis, t0, x0, e.synthesis_options);
    return *syn;
  };
  for (const auto& m : e.compare_methods) {
    double v = kInf;
    if (m == "brute") {
      BruteForceOptions b = e.brute;
      double base = e.brute_duration;
      std::vector<double> hs;
      if (!e.brute_horizon_factors.empty()) {
        if (e.synthesis && synthesis().converged && synthesis().end_time > t0) {
          base = synthesis().end_time - t0;
        }
        for (double f : e.brute_horizon_factors) hs.push_back(t0 + f * base);
      } else {
        hs.push_back(t0 + base);
      }
      v = brute_force_value_scan(e.problem, t0, x0, b, hs).value;
    } else if (m == "dp") {
      if (!dp) continue;
      v = lookup(*dp, t0, x0);
    } else if (m == "synthesis") {
      if (!e.synthesis) continue;
      v = synthesis().value;
    } else if (m == "rollout") {
      if (!e.rollout) continue;
      IntegrateOptions io;
      io.accumulate_cost = true;
      Trajectory tr = integrate(e.problem, e.rollout(t0), t0, x0, t0 + e.rollout_duration,
                                1e-2, io);
      v = tr.cost.back();
    } else {
      throw PreconditionError("unknown estimation method '" + m + "'");
    }
    est.by_method[m] = v;
    est.vhat = std::min(est.vhat, v);
  }
  return est;
}

CompareResult compare_points(const GalleryEntry& e, std::size_t count, std::uint64_t seed,
                             double dp_mesh) {
  CompareResult res;
  std::optional<ValueGrid> dp;
  if (std::find(e.compare_methods.begin(), e.compare_methods.end(), "dp") !=
      e.compare_methods.end()) {
    dp = entry_value_grid(e, dp_mesh > 0.0 ? dp_mesh : e.value_mesh);
  }
  std::mt19937_64 rng(seed);
  std::size_t attempts = 0;
  while (res.rows.size() < count && attempts < 1000 * count) {
    ++attempts;
    Point p = uniform_points(e.window, 1, rng())[0];
    if (e.compare_filter && !e.compare_filter(p.t, p.x)) continue;
    CompareRow row;
    row.point = p;
    row.W = e.candidate(p.t, p.x);
    row.estimates = estimate_value(e, p.t, p.x, dp ? &*dp : nullptr);
    const double vh = row.estimates.vhat;
    row.diff = row.W == vh ? 0.0 : row.W - vh;
    row.slack = e.compare_slack + e.compare_rel_slack * (std::isfinite(vh) ? std::abs(vh) : 0.0);
    if (!(row.diff <= row.slack)) res.pass = false;
    res.max_diff = std::max(res.max_diff, row.diff);
    res.rows.push_back(std::move(row));
  }
  if (e.divergence) {
    const auto& d = *e.divergence;
    res.divergence = divergence_probe(e.problem, d.t0, d.x0, d.family, d.budgets, d.step);
  }
  return res;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  // Config first, so that flags override it.
  for (std::size_t i = 1; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      try {
        load_config(args[i + 1], o);
      } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
      }
    }
  }

  CLI::App app{"Numerical audits of verification hypotheses for HJB inequalities", "hjbverify"};
  add_shared(&app, o);
  auto* verify = app.add_subcommand("verify", "Check the hypotheses on a gallery problem");
  add_shared(verify, o);
  verify->add_option("--theorem", o.theorem, "teo1 | teo2 | eps");
  verify->add_option("--eps", o.eps, "Relaxation for the eps mode");
  verify->add_option("--g-l1", o.g_l1, "L1 norm of g for the eps bound");
  verify->add_option("--grid", o.grid, "tmin tmax xmin.. xmax..")->expected(2, 2 + 2 * kMaxDim);
  verify->add_option("--mesh", o.mesh, "State mesh of the check grid");
  verify->add_option("--dt", o.dt, "Time step of the check grid");
  verify->add_option("--tol-hjb", o.tol_hjb, "Tolerance on the HJB residual");
  verify->add_option("--tol-target", o.tol_target, "Tolerance on W = psi at the target");
  verify->add_option("--tol-boundary", o.tol_boundary, "Tolerance on the boundary condition");
  verify->add_option("--tol-ndj", o.tol_ndj, "Tolerance on downward jumps along trajectories");
  verify->add_option("--tol-liminf", o.tol_liminf, "Tolerance on the essential liminf check");
  verify->add_option("--exclusion-radius", o.exclusion, "Skip residuals this close to A");
  verify->add_option("--boundary-mode", o.boundary_mode, "strict | liminf");
  verify->add_flag("--check-all", o.check_all, "Run iii and v even when Q is the whole domain");
  verify->add_flag("--no-check-all", o.no_check_all, "Drop iii and v when Q is the whole domain");
  verify->add_option("--control-samples", o.control_samples, "Control samples per residual");

  auto* value = app.add_subcommand("value", "Estimate the value function");
  add_shared(value, o);
  value->add_option("--method", o.method, "brute | dp | synthesis | rollout");
  value->add_option("--start", o.start, "[t0] x1 .. xn")->expected(1, kMaxDim + 1);
  value->add_option("--t0", o.t0, "Start time when --start gives only x");
  value->add_option("--pieces", o.pieces, "Equal pieces per brute-force control");
  value->add_option("--samples", o.samples, "Control samples for brute force");
  value->add_option("--horizon", o.horizon, "Brute-force duration after t0");
  value->add_option("--step", o.step, "Integration step");
  value->add_option("--capture-radius", o.capture, "Target capture radius");
  value->add_option("--resolution", o.resolution, "State mesh for dp");

  auto* compare = app.add_subcommand("compare", "Compare the candidate with value estimates");
  add_shared(compare, o);
  compare->add_option("--points", o.points, "Random comparison points");
  compare->add_option("--resolution", o.resolution, "State mesh for dp");

  auto* scan = app.add_subcommand("fuller-scan", "Scan the switching coefficient");
  add_shared(scan, o);
  scan->add_option("--lo", o.lo, "Smallest coefficient");
  scan->add_option("--hi", o.hi, "Largest coefficient");
  scan->add_option("--count", o.count, "Scan points");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (o.print_defaults) {
      out << defaults_json(o).dump(2) << '\n';
      return kOk;
    }
    if (verify->parsed()) return cmd_verify(o, out);
    if (value->parsed()) return cmd_value(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    if (scan->parsed()) return cmd_fuller_scan(o, out);
    err << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SizeGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kGuard;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

}  // namespace hjbv::cli
