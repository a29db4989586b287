#include "hjbverify/gallery.hpp"

#include <cmath>
#include <numbers>

namespace hjbv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTieTol = 1e-9;

// Height of the switching locus over x1.
double locus(double x1) {
  if (x1 == 0.0) return 0.0;
  const double a = std::abs(x1);
  const double k = std::floor(a / 2.0);
  const double d = a - (2.0 * k + 1.0);
  const double h = std::sqrt(std::max(0.0, 1.0 - d * d));
  return x1 > 0.0 ? -h : h;
}

// Clockwise angle from a to b in [0, 2 pi).
double clockwise(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d < 0.0) d += 2.0 * kPi;
  return d;
}

}  // namespace

ControlProblem oscillator_problem() {
  ControlProblem p;
  p.name = "oscillator";
  p.dim = 2;
  p.dynamics = [](double, const Vec& x, const Vec& u) { return vec({x[1], -x[0] + u[0]}); };
  p.running_cost = [](double, const Vec&, const Vec&) { return 1.0; };
  p.final_cost = [](double, const Vec&) { return 0.0; };
  p.target = SetSpec::state_ball(vec({0.0, 0.0}), 0.0);
  p.domain = SetSpec::everything(2);
  p.verification_domain = SetSpec::everything(2);
  p.verification_is_domain = true;
  p.control_set = ControlSetSpec::interval(-1.0, 1.0);
  p.control_norm_exponent = 1.0;
  return p;
}

Vec oscillator_feedback(const Vec& x) {
  const double c = locus(x[0]);
  if (x[1] > c + kTieTol) return scalar_vec(-1.0);
  if (x[1] < c - kTieTol) return scalar_vec(1.0);
  return scalar_vec(x[0] < 0.0 ? -1.0 : 1.0);
}

double oscillator_arc_time(const Vec& start) {
  double x1 = start[0];
  double x2 = start[1];
  double T = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    if (std::hypot(x1, x2) <= 1e-12) return T;
    const double u = oscillator_feedback(vec({x1, x2}))[0];
    const double r = std::hypot(x1 - u, x2);
    const double phi = std::atan2(x2, x1 - u);
    // Terminal arc: the unit circle about (u, 0) on the side leading home.
    if (std::abs(r - 1.0) <= 1e-9 && u * x2 <= 0.0) {
      return T + clockwise(phi, u > 0.0 ? kPi : 0.0);
    }
    double best = kInf;
    const int kmax = static_cast<int>(std::ceil((r + 2.0) / 2.0));
    for (int k = 0; k <= kmax; ++k) {
      for (double side : {1.0, -1.0}) {
        const double cx = side * (2.0 * k + 1.0);
        const double d = std::abs(cx - u);
        if (d == 0.0 || d > r + 1.0 || d < std::abs(r - 1.0)) continue;
        const double a = (r * r - 1.0 + d * d) / (2.0 * d);
        const double h = std::sqrt(std::max(0.0, r * r - a * a));
        const double px = u + a * (cx > u ? 1.0 : -1.0);
        const double py = side > 0.0 ? -h : h;  // lower pieces right, upper pieces left
        const double cw = clockwise(phi, std::atan2(py, px - u));
        if (cw > 1e-10) best = std::min(best, cw);
      }
    }
    if (best == kInf) return kInf;
    T += best;
    x1 = u + r * std::cos(phi - best);
    x2 = r * std::sin(phi - best);
  }
  return kInf;
}

RectifiableSet oscillator_exceptional_set(double reach) {
  std::vector<ManifoldPiece> pieces;
  for (int k = 0; 2 * k <= reach; ++k) {
    const double c = 2.0 * k + 1.0;
    pieces.push_back(ManifoldPiece::circle_arc("switch lower " + std::to_string(k), c, 0.0, 1.0,
                                               -kPi, 0.0));
    pieces.push_back(ManifoldPiece::circle_arc("switch upper " + std::to_string(k), -c, 0.0, 1.0,
                                               0.0, kPi));
  }
  for (int k = 1; 2 * k <= reach + 1.0; ++k) {
    const double r = 2.0 * k + 1.0;
    pieces.push_back(ManifoldPiece::circle_arc("tangent upper " + std::to_string(k), -1.0, 0.0, r,
                                               0.0, kPi));
    pieces.push_back(ManifoldPiece::circle_arc("tangent lower " + std::to_string(k), 1.0, 0.0, r,
                                               -kPi, 0.0));
  }
  return RectifiableSet(2, std::move(pieces));
}

}  // namespace hjbv
