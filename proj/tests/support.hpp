#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "llgrid/density.hpp"
#include "llgrid/random_fields.hpp"

namespace support {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Values ((mult k + add) mod modulus) + 1, matching the Python oracle inputs.
inline llgrid::Field formula_field(const llgrid::GridSpec& g, int mult, int add, int modulus) {
  llgrid::Field f(g);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    f.values[k] = static_cast<double>((mult * static_cast<long>(k) + add) % modulus + 1);
  const double total = f.integral();
  for (double& v : f.values) v /= total;
  return f;
}

}  // namespace support
