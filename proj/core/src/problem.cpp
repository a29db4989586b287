#include "hjbverify/problem.hpp"

#include "hjbverify/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hjbv {

void ControlProblem::validate(const Box& window, std::size_t samples, std::uint64_t seed) const {
  if (dim < 1 || dim > kMaxDim) throw PreconditionError(name + ": state dimension out of range");
  if (!dynamics || !running_cost || !final_cost) {
    throw PreconditionError(name + ": dynamics, running cost and final cost are required");
  }
  if (!target.contains || !domain.contains || !verification_domain.contains) {
    throw PreconditionError(name + ": target, domain and verification domain need membership");
  }
  if (control_norm_exponent < 1.0) throw PreconditionError(name + ": control exponent p < 1");
  if (control_set.sample(5).empty()) throw PreconditionError(name + ": empty control set");
  for (const Vec& u : control_set.sample(11)) {
    if (control_set.contains && !control_set.contains(u)) {
      throw PreconditionError(name + ": control sample outside U");
    }
  }
  if (auto bad = sampled_inclusion_failure(target, verification_domain, window, samples, seed)) {
    throw PreconditionError(name + ": target point outside Q at " + describe(*bad));
  }
  if (auto bad = sampled_inclusion_failure(target, domain, window, samples, seed)) {
    throw PreconditionError(name + ": target point outside Omega at " + describe(*bad));
  }
  if (!domain.whole_space) {
    for (const Point& p : uniform_points(window, samples, seed + 1)) {
      if (verification_domain.contains(p.t, p.x) && !domain.contains(p.t, p.x)) {
        throw PreconditionError(name + ": Q not inside Omega at " + describe(p));
      }
    }
  }
  if (horizon_mode == HorizonMode::infinite) {
    if (!target_neighborhood) throw PreconditionError(name + ": infinite mode needs S1");
    if (auto bad = sampled_inclusion_failure(target, *target_neighborhood, window, samples, seed)) {
      throw PreconditionError(name + ": target point outside S1 at " + describe(*bad));
    }
    for (const Point& p : uniform_points(window, samples, seed + 2)) {
      if (target_neighborhood->contains(p.t, p.x) && !verification_domain.contains(p.t, p.x)) {
        throw PreconditionError(name + ": S1 not inside Q at " + describe(p));
      }
    }
  }
}

const ProbeEntry* ProbeReport::find(const std::string& quantity) const {
  for (const auto& e : entries) {
    if (e.quantity == quantity) return &e;
  }
  return nullptr;
}

namespace {

Vec checked_f(const ControlProblem& pr, double t, const Vec& x, const Vec& u) {
  Vec v;
  try {
    v = pr.f(t, x, u);
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("dynamics threw: ") + e.what() + " at " + describe({t, x}),
                          {t, x});
  }
  if (!v.allFinite()) throw EvaluationError("non-finite dynamics at " + describe({t, x}), {t, x});
  return v;
}

double checked_L(const ControlProblem& pr, double t, const Vec& x, const Vec& u) {
  double v;
  try {
    v = pr.L(t, x, u);
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("running cost threw: ") + e.what() + " at " +
                              describe({t, x}),
                          {t, x});
  }
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite running cost at " + describe({t, x}), {t, x});
  }
  return v;
}

}  // namespace

ProbeReport assumption_probe(const ControlProblem& problem, std::size_t sample_budget,
                             const Box& region, std::uint64_t seed,
                             std::size_t control_samples) {
  if (sample_budget < 1) throw PreconditionError("sample budget must be at least 1");
  const double p = problem.control_norm_exponent;
  auto controls = problem.control_set.sample(control_samples);
  auto xs = uniform_points(region, sample_budget, seed);
  auto ys = uniform_points(region, sample_budget, seed + 7919);

  ProbeEntry growth{"A-4", "L_K growth |f|/(1+|u|^p)", 0.0, xs.front(), 0};
  ProbeEntry lip{"A-4", "L_K x-difference |f(x)-f(y)|/|x-y|", 0.0, xs.front(), 0};
  ProbeEntry onesided{"A-4", "L_K one-sided (f(x)-f(y)).(x-y)/|x-y|^2", -kInf, xs.front(), 0};
  ProbeEntry cost{"A-5", "C_R growth |L|/(1+|u|^p)", 0.0, xs.front(), 0};
  ProbeReport rep;

  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double t = xs[i].t;
    const Vec& x = xs[i].x;
    const Vec& y = ys[i].x;
    const double dxy = (x - y).norm();
    double worst_diff = 0.0;
    for (const Vec& u : controls) {
      const double scale = 1.0 + std::pow(u.norm(), p);
      Vec fx = checked_f(problem, t, x, u);
      Vec fy = checked_f(problem, t, y, u);
      double g = fx.norm() / scale;
      if (g > growth.fitted) {
        growth.fitted = g;
        growth.witness = {t, x};
      }
      double c = std::abs(checked_L(problem, t, x, u)) / scale;
      if (c > cost.fitted) {
        cost.fitted = c;
        cost.witness = {t, x};
      }
      if (dxy > 0.0) {
        double diff = (fx - fy).norm();
        worst_diff = std::max(worst_diff, diff);
        if (diff / dxy > lip.fitted) {
          lip.fitted = diff / dxy;
          lip.witness = {t, x};
        }
        double os = (fx - fy).dot(x - y) / (dxy * dxy);
        if (os > onesided.fitted) {
          onesided.fitted = os;
          onesided.witness = {t, x};
        }
      }
      growth.samples += 1;
      cost.samples += 1;
      lip.samples += 1;
      onesided.samples += 1;
    }
    if (dxy > 0.0) rep.modulus_samples.emplace_back(dxy, worst_diff);
  }
  if (!std::isfinite(onesided.fitted)) onesided.fitted = 0.0;
  std::sort(rep.modulus_samples.begin(), rep.modulus_samples.end());
  rep.entries = {growth, lip, onesided, cost};
  return rep;
}

}  // namespace hjbv
