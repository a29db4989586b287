#include "hjbverify/control.hpp"

#include "hjbverify/errors.hpp"

#include <algorithm>
#include <sstream>

namespace hjbv {

PiecewiseConstantControl::PiecewiseConstantControl(std::vector<double> breakpoints,
                                                   std::vector<Vec> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.size() < 2) throw PreconditionError("control needs at least two breakpoints");
  if (values_.size() + 1 != breakpoints_.size()) {
    throw PreconditionError("control needs one value per interval");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw PreconditionError("control breakpoints must be strictly increasing");
    }
  }
}

PiecewiseConstantControl PiecewiseConstantControl::constant(double t0, double t1, const Vec& value) {
  return PiecewiseConstantControl({t0, t1}, {value});
}

PiecewiseConstantControl PiecewiseConstantControl::uniform(double t0, double t1,
                                                           std::vector<Vec> values) {
  const std::size_t m = values.size();
  std::vector<double> bp(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    bp[i] = (i == m) ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(m);
  }
  return PiecewiseConstantControl(std::move(bp), std::move(values));
}

const Vec& PiecewiseConstantControl::operator()(double t) const {
  if (!(t > breakpoints_.front()) || t > breakpoints_.back()) {
    std::ostringstream os;
    os.precision(17);
    os << "control evaluated at t=" << t << " outside (" << breakpoints_.front() << ", "
       << breakpoints_.back() << "]";
    throw DomainError(os.str());
  }
  // First breakpoint >= t closes the active interval.
  auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

PiecewiseConstantControl PiecewiseConstantControl::refined_at(double t) const {
  if (!(t > breakpoints_.front()) || !(t < breakpoints_.back())) return *this;
  if (std::binary_search(breakpoints_.begin(), breakpoints_.end(), t)) return *this;
  std::vector<double> bp = breakpoints_;
  std::vector<Vec> vals = values_;
  auto it = std::lower_bound(bp.begin(), bp.end(), t);
  std::size_t k = static_cast<std::size_t>(it - bp.begin());
  bp.insert(it, t);
  vals.insert(vals.begin() + static_cast<std::ptrdiff_t>(k - 1), values_[k - 1]);
  return PiecewiseConstantControl(std::move(bp), std::move(vals));
}

}  // namespace hjbv
