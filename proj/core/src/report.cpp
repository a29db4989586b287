#include "hjbverify/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <ostream>

namespace hjbv {

namespace {

using json = nlohmann::ordered_json;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v == 0.0 ? 0.0 : v;
}

json vector_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json axis_json(const Axis& a) { return json{{"lo", number(a.lo)}, {"hi", number(a.hi)}, {"count", a.count}}; }

json grid_json(const GridSpec& g) {
  json s = json::array();
  for (const Axis& a : g.space) s.push_back(axis_json(a));
  return json{{"time", axis_json(g.time)}, {"space", s}, {"mesh", number(g.mesh())}};
}

}  // namespace

std::string report_to_json(const VerificationReport& r, bool include_wall_ms, int indent) {
  json hyps = json::array();
  for (const auto& h : r.hypotheses) {
    json j;
    j["id"] = h.id;
    j["description"] = h.description;
    j["verdict"] = to_string(h.verdict);
    j["worst_violation"] = number(h.worst_violation);
    j["tolerance"] = number(h.tolerance);
    if (h.witness) {
      j["witness"] = json{{"t", number(h.witness->t)}, {"x", vector_json(h.witness->x)}};
    } else {
      j["witness"] = nullptr;
    }
    if (h.witness_control) j["witness_control"] = vector_json(*h.witness_control);
    j["witness_value"] = number(h.witness_value);
    j["points_checked"] = h.points_checked;
    j["points_excluded"] = h.points_excluded;
    j["note"] = h.note;
    hyps.push_back(std::move(j));
  }
  const auto& s = r.spec;
  json tol{{"hjb_tol", number(s.hjb_tol)},
           {"target_tol", number(s.target_tol)},
           {"boundary_tol", number(s.boundary_tol)},
           {"ndj_tol", number(s.ndj_tol)},
           {"liminf_tol", number(s.liminf_tol)},
           {"dist_tol", number(r.tolerances.dist_tol)},
           {"grad_tol", number(r.tolerances.grad_tol)},
           {"h_grad", number(r.tolerances.h_grad)}};
  json global;
  global["tolerances"] = tol;
  global["grid"] = grid_json(s.grid);
  global["exclusion_radius"] = number(s.exclusion_radius > 0.0 ? s.exclusion_radius : 2.0 * s.grid.mesh());
  global["control_samples"] = s.control_samples;
  global["boundary_mode"] = to_string(s.boundary_mode);
  if (s.theorem == Theorem::corollary_eps) {
    global["eps"] = number(s.eps);
    global["g_l1"] = number(s.g_l1);
  }
  global["seed"] = r.seed;
  if (include_wall_ms) global["wall_ms"] = number(r.wall_ms);

  json out;
  out["theorem"] = to_string(r.theorem);
  out["problem"] = r.problem;
  out["conclusion"] = r.conclusion ? "pass" : "fail";
  out["resolution_note"] = r.resolution_note;
  out["window_limited"] = r.window_limited;
  out["hypotheses"] = hyps;
  out["global"] = global;
  return out.dump(indent);
}

void write_residuals_csv(std::ostream& os, const VerificationReport& r) {
  if (!r.residuals) return;
  const GridField& f = *r.residuals;
  os << "t";
  for (int i = 0; i < f.grid.dim(); ++i) os << ",x" << (i + 1);
  os << ",residual\n";
  os.precision(17);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const Point p = f.grid.point(k);
    os << p.t;
    for (Eigen::Index i = 0; i < p.x.size(); ++i) os << ',' << p.x[i];
    os << ',';
    if (!std::isnan(f.values[k])) os << f.values[k];
    os << '\n';
  }
}

}  // namespace hjbv
