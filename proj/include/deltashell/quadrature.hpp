#pragma once

// Gauss-Legendre rules on [-1, 1] and a fixed symmetric triangle rule.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace deltashell {

struct GaussRule {
  std::vector<double> node;
  std::vector<double> weight;
};

// Legendre P_n(x) and its derivative via the three-term recurrence.
inline void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

inline double legendre_p(int n, double x) {
  if (n == 0 || x == 1.0) return 1.0;
  if (x == -1.0) return (n % 2 == 0) ? 1.0 : -1.0;
  double p, dp;
  legendre_pair(n, x, p, dp);
  return p;
}

// Newton iteration from the Chebyshev-like initial guess; nodes accurate to
// machine precision for any practical order.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  GaussRule r;
  r.node.resize(n);
  r.weight.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 1;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, p, dp);
      double dx = -p / dp;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(n, x, p, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.node[i] = -x;  // ascending order
    r.weight[i] = w;
    r.node[n - 1 - i] = x;
    r.weight[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.node[n / 2] = 0.0;
  return r;
}

// Rule mapped to [a, b].
inline GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r = gauss_legendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.node[i] = mid + half * r.node[i];
    r.weight[i] *= half;
  }
  return r;
}

// Seven-point degree-5 rule in barycentric coordinates; weights sum to one
// and are applied against the panel area.
struct TrianglePoint {
  double b0, b1, b2, w;
};

inline const std::array<TrianglePoint, 7>& triangle_rule7() {
  static const double a1 = 0.059715871789769820;
  static const double b1 = 0.470142064105115090;
  static const double a2 = 0.797426985353087320;
  static const double b2 = 0.101286507323456340;
  static const double w0 = 0.225;
  static const double w1 = 0.132394152788506180;
  static const double w2 = 0.125939180544827150;
  static const std::array<TrianglePoint, 7> rule = {{
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, w0},
      {a1, b1, b1, w1},
      {b1, a1, b1, w1},
      {b1, b1, a1, w1},
      {a2, b2, b2, w2},
      {b2, a2, b2, w2},
      {b2, b2, a2, w2},
  }};
  return rule;
}

}  // namespace deltashell
