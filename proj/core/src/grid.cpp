#include "hjbverify/grid.hpp"

#include "hjbverify/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hjbv {

namespace {

Axis make_axis(double lo, double hi, double step) {
  Axis a{lo, hi, 1};
  if (hi > lo) {
    if (!(step > 0.0)) throw PreconditionError("grid step must be positive");
    a.count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    a.count = std::max<std::size_t>(a.count, 2);
  }
  return a;
}

}  // namespace

GridSpec GridSpec::from_window(const Box& window, double mesh, double dt) {
  GridSpec g;
  g.time = make_axis(window.t_lo, window.t_hi, dt > 0.0 ? dt : mesh);
  for (int i = 0; i < window.dim(); ++i) {
    g.space.push_back(make_axis(window.x_lo[i], window.x_hi[i], mesh));
  }
  return g;
}

std::size_t GridSpec::layer_size() const {
  std::size_t n = 1;
  for (const Axis& a : space) n *= a.count;
  return n;
}

double GridSpec::state_mesh() const {
  double m = 0.0;
  for (const Axis& a : space) m = std::max(m, a.step());
  return m;
}

double GridSpec::mesh() const { return std::max(state_mesh(), time.step()); }

Box GridSpec::window() const {
  Box b;
  b.t_lo = time.lo;
  b.t_hi = time.hi;
  b.x_lo = Vec(dim());
  b.x_hi = Vec(dim());
  for (int i = 0; i < dim(); ++i) {
    b.x_lo[i] = space[static_cast<std::size_t>(i)].lo;
    b.x_hi[i] = space[static_cast<std::size_t>(i)].hi;
  }
  return b;
}

std::vector<std::size_t> GridSpec::layer_coords(std::size_t layer_index) const {
  std::vector<std::size_t> c(space.size());
  for (std::size_t k = space.size(); k-- > 0;) {
    c[k] = layer_index % space[k].count;
    layer_index /= space[k].count;
  }
  return c;
}

std::size_t GridSpec::layer_index(const std::vector<std::size_t>& coords) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < space.size(); ++k) idx = idx * space[k].count + coords[k];
  return idx;
}

Vec GridSpec::state(std::size_t layer_index) const {
  Vec x(dim());
  for (std::size_t k = space.size(); k-- > 0;) {
    x[static_cast<Eigen::Index>(k)] = space[k].at(layer_index % space[k].count);
    layer_index /= space[k].count;
  }
  return x;
}

Point GridSpec::point(std::size_t flat_index) const {
  const std::size_t ls = layer_size();
  return {time.at(flat_index / ls), state(flat_index % ls)};
}

GridField::GridField(GridSpec g, double fill) : grid(std::move(g)), values(grid.size(), fill) {}

std::optional<double> interpolate_layer(const GridSpec& grid, const double* layer, const Vec& x) {
  const std::size_t n = grid.space.size();
  std::size_t base[kMaxDim];
  double frac[kMaxDim];
  std::size_t stride[kMaxDim];
  std::size_t s = 1;
  for (std::size_t k = n; k-- > 0;) {
    stride[k] = s;
    s *= grid.space[k].count;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Axis& a = grid.space[k];
    const double v = x[static_cast<Eigen::Index>(k)];
    if (!(v >= a.lo && v <= a.hi)) return std::nullopt;
    if (a.count == 1) {
      base[k] = 0;
      frac[k] = 0.0;
      continue;
    }
    double pos = (v - a.lo) / a.step();
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i >= a.count - 1) i = a.count - 2;
    base[k] = i;
    frac[k] = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  }
  double acc = 0.0;
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool up = (c >> k) & 1U;
      if (up && grid.space[k].count == 1) {
        w = 0.0;
        break;
      }
      w *= up ? frac[k] : 1.0 - frac[k];
      idx += (base[k] + (up ? 1 : 0)) * stride[k];
    }
    if (w <= 0.0) continue;
    const double v = layer[idx];
    if (std::isinf(v) && v > 0) return kInf;
    acc += w * v;
  }
  return acc;
}

}  // namespace hjbv
