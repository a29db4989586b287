#include "hjbverify/verify.hpp"

#include <algorithm>
#include <cmath>

namespace hjbv {

namespace {

// Separable min (erode) or max (dilate) filter with half-width w cells.
std::vector<double> box_filter(const GridSpec& grid, const std::vector<double>& in, std::size_t w,
                               bool take_max) {
  std::vector<std::size_t> dims;
  dims.push_back(grid.time.count);
  for (const Axis& a : grid.space) dims.push_back(a.count);
  std::vector<std::size_t> strides(dims.size());
  std::size_t s = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    strides[k] = s;
    s *= dims[k];
  }
  std::vector<double> cur = in;
  std::vector<double> out(in.size());
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    if (dims[axis] < 2) continue;
    const std::size_t n = dims[axis];
    const std::size_t st = strides[axis];
    for (std::size_t flat = 0; flat < cur.size(); ++flat) {
      const std::size_t i = (flat / st) % n;
      const std::size_t lo = i >= w ? i - w : 0;
      const std::size_t hi = std::min(n - 1, i + w);
      double acc = take_max ? -kInf : kInf;
      for (std::size_t j = lo; j <= hi; ++j) {
        const double v = cur[flat - i * st + j * st];
        if (std::isnan(v)) continue;
        acc = take_max ? std::max(acc, v) : std::min(acc, v);
      }
      out[flat] = std::isnan(cur[flat]) ? cur[flat] : acc;
    }
    std::swap(cur, out);
  }
  return cur;
}

}  // namespace

GridField envelope(const GridField& field, EnvelopeMode mode, const std::vector<double>& radii) {
  // Half-width from the smallest radius that reaches a neighbour.
  const double cell = field.grid.mesh();
  double rmin = kInf;
  for (double r : radii) {
    if (cell > 0.0 && r >= cell) rmin = std::min(rmin, r);
  }
  const std::size_t w =
      std::isfinite(rmin) ? static_cast<std::size_t>(std::floor(rmin / cell + 1e-9)) : 1;
  GridField out = field;
  if (mode == EnvelopeMode::lower) {
    out.values = box_filter(field.grid, box_filter(field.grid, field.values, w, false), w, true);
  } else {
    out.values = box_filter(field.grid, box_filter(field.grid, field.values, w, true), w, false);
  }
  return out;
}

}  // namespace hjbv
