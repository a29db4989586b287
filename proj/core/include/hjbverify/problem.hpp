#pragma once

#include "hjbverify/sets.hpp"
#include "hjbverify/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hjbv {

enum class HorizonMode { finite, infinite };

using Dynamics = std::function<Vec(double, const Vec&, const Vec&)>;
using RunningCost = std::function<double(double, const Vec&, const Vec&)>;
using FinalCost = std::function<double(double, const Vec&)>;

// Bolza problem data: x' = f(t, x, u), cost = int L + psi at the target.
struct ControlProblem {
  std::string name;
  int dim = 1;
  Dynamics dynamics;
  RunningCost running_cost;
  FinalCost final_cost;
  SetSpec target;               // S, closed
  SetSpec domain;               // Omega, open
  SetSpec verification_domain;  // Q, open, S ⊆ Q ⊆ Omega
  bool verification_is_domain = false;
  ControlSetSpec control_set;
  double control_norm_exponent = 1.0;
  HorizonMode horizon_mode = HorizonMode::finite;
  std::optional<SetSpec> target_neighborhood;  // S1, infinite mode only

  Vec f(double t, const Vec& x, const Vec& u) const { return dynamics(t, x, u); }
  double L(double t, const Vec& x, const Vec& u) const { return running_cost(t, x, u); }
  double psi(double t, const Vec& x) const { return final_cost(t, x); }

  // Structural and sampled invariant checks; throws PreconditionError.
  void validate(const Box& window, std::size_t samples = 200, std::uint64_t seed = 1) const;
};

// One fitted bound from the sampled probe.
struct ProbeEntry {
  std::string assumption;
  std::string quantity;
  double fitted = 0.0;
  Point witness;
  std::size_t samples = 0;
};

struct ProbeReport {
  std::vector<ProbeEntry> entries;
  // (|x - y|, max_u |f(t,x,u) - f(t,y,u)|) pairs, sorted by distance.
  std::vector<std::pair<double, double>> modulus_samples;

  const ProbeEntry* find(const std::string& quantity) const;
};

// Observed worst ratios for the growth and regularity bounds on f and L with
// phi1 = phi2 = 1 over random (t, x, y, u) in `region`. Reports, never proves.
ProbeReport assumption_probe(const ControlProblem& problem, std::size_t sample_budget,
                             const Box& region, std::uint64_t seed = 1,
                             std::size_t control_samples = 21);

}  // namespace hjbv
