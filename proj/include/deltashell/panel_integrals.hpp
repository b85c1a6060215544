#pragma once

// Quadrature of the kernel e^{-kappa d}/(4 pi d) over flat triangular
// panels: a closed-form in-plane 1/r integral for the singular self term,
// a fixed 7-point rule in the far field, and recursive subdivision for
// nearby panels.

#include <Eigen/Dense>
#include <cmath>

#include "deltashell/quadrature.hpp"

namespace deltashell {
namespace panels {

// Integral of 1/|p - y| dA(y) over the triangle (a, b, c) for an
// observation point p lying in the triangle's plane (here: its centroid).
// Decomposition into signed edge contributions:
//   I = sum_e h_e * ln((R2 + s2)/(R1 + s1)),
// h_e the signed in-plane distance from p to the edge line (positive
// inside), s1, s2 the tangential coordinates of the edge ends, R1, R2 the
// distances to them.
inline double flat_triangle_inv_r(const Eigen::Vector3d& p,
                                  const Eigen::Vector3d& a,
                                  const Eigen::Vector3d& b,
                                  const Eigen::Vector3d& c) {
  Eigen::Vector3d n = (b - a).cross(c - a);
  double scale = std::sqrt(n.norm());
  n.normalize();
  const Eigen::Vector3d* v[4] = {&a, &b, &c, &a};
  double total = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector3d &pa = *v[e], &pb = *v[e + 1];
    Eigen::Vector3d t = pb - pa;
    double len = t.norm();
    if (len == 0.0) continue;
    t /= len;
    Eigen::Vector3d m = t.cross(n);  // in-plane outward normal of the edge
    double h = (pa - p).dot(m);
    if (std::abs(h) < 1e-14 * scale) continue;  // p on the edge line
    double s1 = (pa - p).dot(t), s2 = (pb - p).dot(t);
    double r1 = (pa - p).norm(), r2 = (pb - p).norm();
    double log_term;
    if (s1 < 0.0 && s2 < 0.0)
      log_term = std::log((r1 - s1) / (r2 - s2));  // stable branch
    else
      log_term = std::log((r2 + s2) / (r1 + s1));
    total += h * log_term;
  }
  return total;
}

// Integral of |p - y| dA(y) over the triangle (a, b, c) for an in-plane
// observation point p.  Same signed edge decomposition as above; per edge
// the radial integral (1/3) int ell^3 dtheta has the sec^3 antiderivative
//   (h/6) (r2 s2 - r1 s1) + (h^3/6) ln((r2 + s2)/(r1 + s1)).
inline double flat_triangle_abs_r(const Eigen::Vector3d& p,
                                  const Eigen::Vector3d& a,
                                  const Eigen::Vector3d& b,
                                  const Eigen::Vector3d& c) {
  Eigen::Vector3d n = (b - a).cross(c - a);
  double scale = std::sqrt(n.norm());
  n.normalize();
  const Eigen::Vector3d* v[4] = {&a, &b, &c, &a};
  double total = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector3d &pa = *v[e], &pb = *v[e + 1];
    Eigen::Vector3d t = pb - pa;
    double len = t.norm();
    if (len == 0.0) continue;
    t /= len;
    Eigen::Vector3d m = t.cross(n);
    double h = (pa - p).dot(m);
    if (std::abs(h) < 1e-14 * scale) continue;
    double s1 = (pa - p).dot(t), s2 = (pb - p).dot(t);
    double r1 = (pa - p).norm(), r2 = (pb - p).norm();
    double log_term;
    if (s1 < 0.0 && s2 < 0.0)
      log_term = std::log((r1 - s1) / (r2 - s2));
    else
      log_term = std::log((r2 + s2) / (r1 + s1));
    total += h * (r2 * s2 - r1 * s1) / 6.0 + h * h * h / 6.0 * log_term;
  }
  return total;
}

// Kernel without the 1/(4 pi): exp(-kappa d)/d.
inline double screened_inv(double d, double kappa) {
  if (kappa == 0.0) return 1.0 / d;
  return std::exp(-kappa * d) / d;
}

// Smooth remainder (exp(-kappa d) - 1)/d of the self-term split; finite at
// d = 0 where it tends to -kappa.
inline double screened_remainder(double d, double kappa) {
  if (d < 1e-300) return -kappa;
  return std::expm1(-kappa * d) / d;
}

// Twice-smoothed remainder (exp(-kappa d) - 1 + kappa d - (kappa d)^2/2) / d:
// what is left of the kernel after the 1/d, constant and |d| terms are
// integrated in closed form.  C^2 at d = 0 (leading term -kappa^3 d^2 / 6),
// so a low-order panel rule handles it well.  Series evaluation for small
// kappa d avoids the cancellation of the three leading orders.
inline double screened_remainder2(double d, double kappa) {
  double x = kappa * d;
  if (x < 0.5) {
    double term = -x * x * x / 6.0;  // n = 3 term of sum (-x)^n / n!
    double sum = term;
    for (int n = 4; n <= 14; ++n) {
      term *= -x / n;
      sum += term;
    }
    return d < 1e-300 ? 0.0 : sum / d;
  }
  return (std::expm1(-x) + x - 0.5 * x * x) / d;
}

// Fixed 7-point (degree 5) quadrature of the kernel over one flat panel.
inline double far_integral(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                           const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                           double area, double kappa) {
  double acc = 0.0;
  for (const TrianglePoint& q : triangle_rule7()) {
    Eigen::Vector3d y = q.b0 * a + q.b1 * b + q.b2 * c;
    acc += q.w * screened_inv((p - y).norm(), kappa);
  }
  return acc * area;
}

// Recursive 4-way subdivision until every leaf is comfortably far from the
// observation point relative to its own size.
inline double near_integral(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                            double area, double kappa, int depth) {
  Eigen::Vector3d g = (a + b + c) / 3.0;
  double r = std::sqrt(std::max({(a - g).squaredNorm(), (b - g).squaredNorm(),
                                 (c - g).squaredNorm()}));
  if (depth >= 6 || (p - g).norm() > 3.0 * r)
    return far_integral(p, a, b, c, area, kappa);
  Eigen::Vector3d ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  double quarter = 0.25 * area;
  return near_integral(p, a, ab, ca, quarter, kappa, depth + 1) +
         near_integral(p, ab, b, bc, quarter, kappa, depth + 1) +
         near_integral(p, ca, bc, c, quarter, kappa, depth + 1) +
         near_integral(p, ab, bc, ca, quarter, kappa, depth + 1);
}

// Integral of exp(-kappa d)/d over the panel containing p (its centroid):
// closed forms for the 1/d, constant and |d| parts plus regular quadrature
// of the twice-smoothed remainder.
inline double self_integral(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                            double area, double kappa) {
  double value = flat_triangle_inv_r(p, a, b, c);
  if (kappa != 0.0) {
    value -= kappa * area;
    value += 0.5 * kappa * kappa * flat_triangle_abs_r(p, a, b, c);
    double acc = 0.0;
    for (const TrianglePoint& q : triangle_rule7()) {
      Eigen::Vector3d y = q.b0 * a + q.b1 * b + q.b2 * c;
      acc += q.w * screened_remainder2((p - y).norm(), kappa);
    }
    value += acc * area;
  }
  return value;
}

}  // namespace panels
}  // namespace deltashell
