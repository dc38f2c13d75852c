#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace critgrowth {

using Vec = std::vector<double>;
/// Integer population vector; one count per type.
using State = std::vector<std::int64_t>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double dot(std::span<const std::int64_t> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline Vec to_real(std::span<const std::int64_t> z) {
  return Vec(z.begin(), z.end());
}

inline bool is_zero(std::span<const std::int64_t> z) {
  for (auto c : z)
    if (c != 0) return false;
  return true;
}

inline double l1(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += std::abs(c);
  return s;
}

}  // namespace critgrowth
