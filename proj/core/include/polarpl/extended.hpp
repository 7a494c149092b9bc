#pragma once

#include <cassert>
#include <cmath>
#include <limits>

namespace polarpl {

// Extended non-negative scalar conventions. The toolkit represents functions
// into [0, +inf] with IEEE +infinity as the distinguished infinite element.
// The arithmetic below is the full set of extended rules the algorithms rely
// on; in particular c/inf = 0 for every finite c (either sign), which makes a
// supremum over a region where the function is infinite contribute exactly 0.
// 0*inf is never formed: all convolution weights are sampled in open (0,1).
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_inf(double v) { return std::isinf(v) && v > 0; }
inline bool is_finite(double v) { return std::isfinite(v); }

// c + v with c finite, v extended.
inline double ext_add(double c, double v) {
  assert(std::isfinite(c));
  return c + v;  // c + inf == inf in IEEE
}

// c * v for strictly positive finite c and extended v >= 0.
inline double ext_scale(double c, double v) {
  assert(std::isfinite(c) && c > 0.0);
  return c * v;  // c * inf == inf
}

// c / v for finite c (any sign) and extended v > 0. c / inf == 0.
inline double ext_div(double c, double v) {
  assert(std::isfinite(c) && v > 0.0);
  return c / v;
}

inline double ext_min(double a, double b) { return a < b ? a : b; }
inline double ext_max(double a, double b) { return a > b ? a : b; }

}  // namespace polarpl
