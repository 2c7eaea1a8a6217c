#pragma once

#include <cstddef>
#include <vector>

namespace weakeq {

/// n equally spaced points from lo to hi inclusive. n == 1 yields {lo}.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// n points strictly inside (0, right): right/n, ..., right(1 - 1/n).
std::vector<double> open_interval_grid(double right, std::size_t n);

}  // namespace weakeq
