#include "hjbverify/errors.hpp"

#include <sstream>

namespace hjbv {

bool Box::contains(double t, const Vec& x) const {
  if (t < t_lo || t > t_hi) return false;
  for (int i = 0; i < dim(); ++i) {
    if (x[i] < x_lo[i] || x[i] > x_hi[i]) return false;
  }
  return true;
}

std::string describe(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << p.t << ", x=[";
  for (Eigen::Index i = 0; i < p.x.size(); ++i) {
    if (i) os << ", ";
    os << p.x[i];
  }
  os << "])";
  return os.str();
}

}  // namespace hjbv
