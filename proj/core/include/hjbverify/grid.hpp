#pragma once

#include "hjbverify/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace hjbv {

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  double step() const { return count > 1 ? (hi - lo) / static_cast<double>(count - 1) : 0.0; }
  double at(std::size_t i) const {
    return i + 1 == count ? hi : lo + step() * static_cast<double>(i);
  }
};

// Uniform grid over (t, x). Flat index: time slowest, then x1 .. xn with xn
// fastest.
struct GridSpec {
  Axis time;
  std::vector<Axis> space;

  // Axes covering `window` with steps close to `mesh` (time step `dt`, or
  // `mesh` when dt is 0). A degenerate time range gives one layer.
  static GridSpec from_window(const Box& window, double mesh, double dt = 0.0);

  int dim() const { return static_cast<int>(space.size()); }
  std::size_t layer_size() const;
  std::size_t size() const { return time.count * layer_size(); }
  double state_mesh() const;
  double mesh() const;
  Box window() const;

  Vec state(std::size_t layer_index) const;
  Point point(std::size_t flat) const;
  std::size_t flat(std::size_t time_index, std::size_t layer_index) const {
    return time_index * layer_size() + layer_index;
  }
  std::vector<std::size_t> layer_coords(std::size_t layer_index) const;
  std::size_t layer_index(const std::vector<std::size_t>& coords) const;
};

struct GridField {
  GridSpec grid;
  std::vector<double> values;

  GridField() = default;
  GridField(GridSpec g, double fill);

  double& at(std::size_t time_index, std::size_t layer_index) {
    return values[grid.flat(time_index, layer_index)];
  }
  double at(std::size_t time_index, std::size_t layer_index) const {
    return values[grid.flat(time_index, layer_index)];
  }
  const double* layer(std::size_t time_index) const {
    return values.data() + grid.flat(time_index, 0);
  }
};

// Multilinear interpolation of one space layer. Any corner with positive
// weight holding +inf makes the result +inf. Empty outside the box.
std::optional<double> interpolate_layer(const GridSpec& grid, const double* layer, const Vec& x);

}  // namespace hjbv
