#pragma once

// Asymptotic series for radially deformed unit spheres
// r = 1 + eps * rho: the critical constant strength alpha_eps, the surface
// radius sbar_eps, and their product through second order, plus the
// special fourth-order coefficient for pure first-order profiles.
//
// With rho = sum of order-n components X_n (orthonormal convention,
// I_n = sum of squared coefficients at order n; X0 the constant value):
//   alpha_eps = 1 - eps X0 + eps^2 [ X0^2 - (1/4pi) sum (1/2)(n^2 + 1/n) I_n ]
//   sbar_eps  = 1 + eps X0 + eps^2 (1/4pi) sum ((n^2 + n + 2)/4) I_n
//   alpha_eps * sbar_eps = 1 - eps^2 (1/4pi) sum c_n I_n,
//       c_n = n^2/2 + 1/(2n) - (n^2 + n + 2)/4
// so c_1 = 0 and the product deficit starts at n = 2; for a purely
// first-order profile the leading deficit is the quartic term
//   -3 (A^2 + B^2 + C^2)^2 / (20 pi) * eps^4.

#include <cmath>
#include <string>
#include <vector>

#include "deltashell/common.hpp"
#include "deltashell/harmonics.hpp"

namespace deltashell {

inline double mode_product_coefficient(int n) {
  if (n < 1) throw std::invalid_argument("mode_product_coefficient: n >= 1");
  double nn = n;
  return nn * nn / 2.0 + 1.0 / (2.0 * nn) - (nn * nn + nn + 2.0) / 4.0;
}

// epsilon^4 coefficient of the product for rho = A Y(1,0) + B Y(1,-1) + C Y(1,1).
inline double fourth_order_n1(double A, double B, double C) {
  double e = A * A + B * B + C * C;
  return -3.0 * e * e / (20.0 * 3.14159265358979323846);
}

struct PerturbationSeries {
  double X0 = 0.0;               // constant value of the order-0 component
  std::vector<double> I;         // I[n] = mode energy, n = 0..n_max
  double alpha1 = 0.0, alpha2 = 0.0;
  double sbar1 = 0.0, sbar2 = 0.0;
  double product2 = 0.0;         // eps^2 coefficient of the product
  bool has_fourth = false;       // profile is purely first order
  double fourth = 0.0;           // eps^4 coefficient when has_fourth
  HarmonicCoeffs S1, R1;         // first-order exterior/interior components

  std::string keyed_text() const {
    std::string out;
    out += strfmt("X0 = %s\n", fmt_g17(X0).c_str());
    out += strfmt("alpha1 = %s\n", fmt_g17(alpha1).c_str());
    out += strfmt("alpha2 = %s\n", fmt_g17(alpha2).c_str());
    out += strfmt("sbar1 = %s\n", fmt_g17(sbar1).c_str());
    out += strfmt("sbar2 = %s\n", fmt_g17(sbar2).c_str());
    out += strfmt("product2 = %s\n", fmt_g17(product2).c_str());
    out += strfmt("has_fourth = %d\n", has_fourth ? 1 : 0);
    if (has_fourth) out += strfmt("fourth = %s\n", fmt_g17(fourth).c_str());
    for (std::size_t n = 1; n < I.size(); ++n)
      out += strfmt("I_%zu = %s  c_%zu = %s\n", n, fmt_g17(I[n]).c_str(), n,
                    fmt_g17(mode_product_coefficient(static_cast<int>(n))).c_str());
    return out;
  }
};

inline PerturbationSeries series_from_profile(const HarmonicCoeffs& rho) {
  const double pi = 3.14159265358979323846;
  int n_max = rho.n_max();
  PerturbationSeries s;
  s.X0 = rho.coeff(0, 0) / std::sqrt(4.0 * pi);
  s.I.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) s.I[n] = rho.mode_energy(n);

  KahanSum a2, s2, p2;
  for (int n = 1; n <= n_max; ++n) {
    double nn = n;
    a2.add(0.5 * (nn * nn + 1.0 / nn) * s.I[n]);
    s2.add((nn * nn + nn + 2.0) / 4.0 * s.I[n]);
    p2.add(mode_product_coefficient(n) * s.I[n]);
  }
  s.alpha1 = -s.X0;
  s.alpha2 = s.X0 * s.X0 - a2.value() / (4.0 * pi);
  s.sbar1 = s.X0;
  s.sbar2 = s2.value() / (4.0 * pi);
  s.product2 = -p2.value() / (4.0 * pi);

  // First-order matching coefficients, same basis as rho:
  //   S_n = (1+n)/(2n) X_n,  R_n = (1-n)/(2n) X_n  (n >= 1),
  //   S_0 = 0, R_0 = -X_0.
  s.S1 = HarmonicCoeffs(n_max);
  s.R1 = HarmonicCoeffs(n_max);
  s.R1.set_coeff(0, 0, -rho.coeff(0, 0));
  for (int n = 1; n <= n_max; ++n)
    for (int m = -n; m <= n; ++m) {
      double c = rho.coeff(n, m);
      if (c == 0.0) continue;
      s.S1.set_coeff(n, m, (1.0 + n) / (2.0 * n) * c);
      s.R1.set_coeff(n, m, (1.0 - n) / (2.0 * n) * c);
    }

  // The quartic term is known only for purely first-order profiles.
  bool pure_n1 = s.I[0] == 0.0;
  for (int n = 2; n <= n_max; ++n)
    if (s.I[n] != 0.0) pure_n1 = false;
  if (pure_n1 && n_max >= 1 && s.I[1] > 0.0) {
    s.has_fourth = true;
    s.fourth = -3.0 * s.I[1] * s.I[1] / (20.0 * pi);
  }
  return s;
}

struct SeriesPrediction {
  double alpha_eps = 1.0;
  double sbar_eps = 1.0;
  double product = 1.0;
};

// Truncated numeric values; the product uses the combined formula (the
// eps^1 terms cancel exactly), not the product of the truncations.
inline SeriesPrediction predict(const PerturbationSeries& s, double eps) {
  SeriesPrediction p;
  p.alpha_eps = 1.0 + eps * s.alpha1 + eps * eps * s.alpha2;
  p.sbar_eps = 1.0 + eps * s.sbar1 + eps * eps * s.sbar2;
  p.product = 1.0 + eps * eps * s.product2;
  if (s.has_fourth) p.product += eps * eps * eps * eps * s.fourth;
  return p;
}

}  // namespace deltashell
