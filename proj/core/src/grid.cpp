#include "weakeq/grid.hpp"

namespace weakeq {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + step * static_cast<double>(i));
  if (n > 1) out.back() = hi;
  return out;
}

std::vector<double> open_interval_grid(double right, std::size_t n) {
  const double nn = static_cast<double>(n);
  return linspace(right / nn, right * (1.0 - 1.0 / nn), n);
}

}  // namespace weakeq
