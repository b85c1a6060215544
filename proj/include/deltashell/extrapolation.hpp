#pragma once

// Convergence-series post-processing: Richardson/Aitken extrapolation over
// mesh levels and small least-squares fits for slope extraction.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace deltashell {

struct Extrapolation {
  double value = 0.0;     // best estimate of the limit
  double ratio = 0.0;     // error-contraction ratio between the last steps
  bool accelerated = false;  // false: sequence too flat/noisy, last value kept
};

// Aitken-style extrapolation from the last three entries of a level series.
// Works on any geometrically converging sequence without knowing the order;
// falls back to the finest value when the differences are at rounding level
// or not contracting.
inline Extrapolation richardson(const std::vector<double>& v) {
  if (v.size() < 3)
    throw std::invalid_argument("richardson: need at least 3 levels");
  double v1 = v[v.size() - 3], v2 = v[v.size() - 2], v3 = v[v.size() - 1];
  double d1 = v2 - v1, d2 = v3 - v2;
  Extrapolation out;
  out.value = v3;
  double floor = 1e-13 * std::max(std::abs(v3), 1e-300);
  if (std::abs(d2) <= floor) return out;  // converged to rounding level
  double r = d1 / d2;
  out.ratio = r;
  if (!std::isfinite(r) || r <= 1.05) return out;  // not safely contracting
  out.value = v3 + d2 / (r - 1.0);
  out.accelerated = true;
  return out;
}

// Least squares y = a + b x; returns a, writes b.
inline double linear_fit(const std::vector<double>& x,
                         const std::vector<double>& y, double& slope) {
  std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw std::invalid_argument("linear_fit: need matching arrays, n >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  slope = (n * sxy - sx * sy) / det;
  return (sy - slope * sx) / n;
}

// Fit y = pref * x^slope through positive data (log-log least squares).
inline void powerlaw_fit(const std::vector<double>& x,
                         const std::vector<double>& y, double& slope,
                         double& prefactor) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("powerlaw_fit: data must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double b;
  double a = linear_fit(lx, ly, b);
  slope = b;
  prefactor = std::exp(a);
}

}  // namespace deltashell
