#pragma once

#include <hjbverify/gallery.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjbv::cli {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kFail = 2,
  kUsage = 64,
  kGuard = 65,
  kIo = 74,
};

// Entry point shared by the executable and the tests. argv[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Value estimates at one point, keyed by method name (+inf when a method
// found no admissible control).
struct Estimates {
  std::map<std::string, double> by_method;
  double vhat = kInf;  // minimum over the entry's compare methods
};

// The "dp" method reads `dp` when given and is skipped otherwise.
Estimates estimate_value(const GalleryEntry& entry, double t0, const Vec& x0,
                         const ValueGrid* dp = nullptr);

// Value grid of the entry at the given state mesh (value iteration for
// autonomous entries, backward induction otherwise).
ValueGrid entry_value_grid(const GalleryEntry& entry, double mesh);

// Linear in time between layers, multilinear in space. +inf outside.
double lookup(const ValueGrid& grid, double t, const Vec& x);

struct CompareRow {
  Point point;
  double W = 0.0;
  Estimates estimates;
  double diff = 0.0;   // W - V^
  double slack = 0.0;  // allowed W - V^
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double max_diff = -kInf;
  bool pass = true;
  std::vector<DivergenceRow> divergence;
};

// Random window points accepted by the entry's filter, W against V^.
CompareResult compare_points(const GalleryEntry& entry, std::size_t count, std::uint64_t seed,
                             double dp_mesh = 0.0);

}  // namespace hjbv::cli
