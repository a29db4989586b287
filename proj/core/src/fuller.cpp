#include "hjbverify/gallery.hpp"

#include "hjbverify/errors.hpp"
#include "hjbverify/parallel.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace hjbv {

namespace {

constexpr double kPi = std::numbers::pi;

// Profile of the closed-loop cost on the curve x1^2 + x2^4 = 1, sampled at
// uniform polar angles of [0, pi]. Cost is even in x, so pi-periodic.
struct Profile {
  std::vector<double> v;
  double dtheta = 0.0;

  double at(double theta) const {
    const std::size_t n = v.size() - 1;  // v[n] == v[0]
    double s = std::fmod(theta, kPi);
    if (s < 0.0) s += kPi;
    const double pos = s / dtheta;
    const auto i = std::min(static_cast<std::size_t>(pos), n - 1);
    const double w = pos - static_cast<double>(i);
    auto node = [&](std::ptrdiff_t j) {
      const auto m = static_cast<std::ptrdiff_t>(n);
      return v[static_cast<std::size_t>(((j % m) + m) % m)];
    };
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double p0 = node(ii - 1), p1 = node(ii), p2 = node(ii + 1), p3 = node(ii + 2);
    // Catmull-Rom.
    return p1 + 0.5 * w *
                    (p2 - p0 +
                     w * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + w * (3.0 * (p1 - p2) + p3 - p0)));
  }
};

Vec unit_curve_point(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double r = std::sqrt(2.0 / (c * c + std::sqrt(c * c * c * c + 4.0 * s * s * s * s)));
  return vec({r * c, r * s});
}

std::shared_ptr<const Profile> profile_for(double c) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const Profile>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
  }
  constexpr std::size_t kNodes = 1024;
  auto prof = std::make_shared<Profile>();
  prof->dtheta = kPi / static_cast<double>(kNodes);
  prof->v.assign(kNodes + 1, 0.0);
  parallel_for(kNodes, [&](std::size_t i) {
    const SynthesisResult r =
        fuller_synthesis(c, unit_curve_point(prof->dtheta * static_cast<double>(i)));
    prof->v[i] = r.value;
  });
  prof->v[kNodes] = prof->v[0];
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(c, prof).first->second;
}

}  // namespace

ControlProblem fuller_problem() {
  ControlProblem p;
  p.name = "fuller";
  p.dim = 2;
  p.dynamics = [](double, const Vec& x, const Vec& u) { return vec({x[1], u[0]}); };
  p.running_cost = [](double, const Vec& x, const Vec&) { return x[0] * x[0]; };
  p.final_cost = [](double, const Vec&) { return 0.0; };
  p.target = SetSpec::state_ball(vec({0.0, 0.0}), 0.0);
  p.domain = SetSpec::everything(2);
  p.verification_domain = SetSpec::everything(2);
  p.verification_is_domain = true;
  p.control_set = ControlSetSpec::interval(-1.0, 1.0);
  p.control_norm_exponent = 1.0;
  return p;
}

Vec fuller_feedback(double c, const Vec& x) {
  const double s = x[0] + c * x[1] * std::abs(x[1]);
  const double tol = 1e-12 * (std::abs(x[0]) + 1e-300);
  if (s > tol) return scalar_vec(-1.0);
  if (s < -tol) return scalar_vec(1.0);
  // On the switching curve follow it toward the origin.
  if (x[1] != 0.0) return scalar_vec(x[1] > 0.0 ? -1.0 : 1.0);
  return scalar_vec(x[0] > 0.0 ? -1.0 : 1.0);
}

SynthesisResult fuller_synthesis(double c, const Vec& x, const SynthesisOptions& options) {
  static const ControlProblem problem = fuller_problem();
  return value_from_synthesis(
      problem, [c](double, const Vec& y) { return fuller_feedback(c, y); }, 0.0, x, options);
}

FullerScan fuller_scan(double lo, double hi, std::size_t count, const SynthesisOptions& options) {
  if (count < 3 || !(hi > lo)) throw PreconditionError("scan needs at least 3 points and lo < hi");
  FullerScan scan;
  scan.c.resize(count);
  scan.cost.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    scan.c[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  parallel_for(count, [&](std::size_t i) {
    scan.cost[i] = fuller_synthesis(scan.c[i], vec({1.0, 0.0}), options).value;
  });
  scan.argmin = static_cast<std::size_t>(
      std::min_element(scan.cost.begin(), scan.cost.end()) - scan.cost.begin());
  // Golden-section refinement inside the bracketing cells.
  double a = scan.c[scan.argmin == 0 ? 0 : scan.argmin - 1];
  double b = scan.c[std::min(count - 1, scan.argmin + 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto cost = [&](double c) { return fuller_synthesis(c, vec({1.0, 0.0}), options).value; };
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 40 && b - a > 1e-9; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = cost(x2);
    }
  }
  scan.best_c = f1 <= f2 ? x1 : x2;
  scan.best_cost = std::min(f1, f2);
  if (scan.cost[scan.argmin] < scan.best_cost) {
    scan.best_c = scan.c[scan.argmin];
    scan.best_cost = scan.cost[scan.argmin];
  }
  return scan;
}

const FullerScan& fuller_default_scan() {
  static const FullerScan scan = fuller_scan();
  return scan;
}

CandidateValueFunction fuller_candidate(double c, double offset) {
  auto prof = profile_for(c);
  auto value = [prof, offset](double, const Vec& x) {
    const double rho = std::pow(x[0] * x[0] + x[1] * x[1] * x[1] * x[1], 0.25);
    if (rho == 0.0) return offset;
    const double theta = std::atan2(x[1] / rho, x[0] / (rho * rho));
    return std::pow(rho, 5.0) * prof->at(theta) + offset;
  };
  const double reach = 3.0;
  std::vector<ManifoldPiece> pieces;
  for (double side : {1.0, -1.0}) {
    ManifoldPiece p;
    p.label = side > 0.0 ? "switch curve x2 < 0" : "switch curve x2 > 0";
    p.param_lo = scalar_vec(0.0);
    p.param_hi = scalar_vec(reach);
    p.embed = [c, side](const Vec& s) { return vec({side * c * s[0] * s[0], -side * s[0]}); };
    p.time_cylinder = true;
    p.base_cells = 256;
    pieces.push_back(std::move(p));
  }
  return CandidateValueFunction("fuller closed-loop cost", value, {},
                                RectifiableSet(2, std::move(pieces)));
}

}  // namespace hjbv
