#pragma once

// Real orthonormal spherical harmonics on the unit sphere.
//
// Angle convention used across the whole library: a direction is
// (polar, azimuth) with polar in [0, pi] measured from +z and azimuth in
// [0, 2*pi) around +z, so (x, y, z) = (sin p cos a, sin p sin a, cos p).
//
// Basis convention: no alternating sign in the associated Legendre part, so
// Y(1,1) = +sqrt(3/4pi) * sin(polar) * cos(azimuth).  Index m > 0 carries
// cos(m*azimuth), m < 0 carries sin(|m|*azimuth), and the basis is
// orthonormal: integral of Y(n,m)*Y(n',m') over the sphere = delta.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "deltashell/common.hpp"
#include "deltashell/quadrature.hpp"

namespace deltashell {

namespace detail {

// Normalized Legendre block lambda(n, m) with polar derivative, m fixed,
// n = m .. n_max.  Y(n, m) = lambda(n, |m|) * azimuthal factor.
// Normalization: integral of lambda^2 sin(polar) d polar = 1.
struct LegendreColumn {
  std::vector<double> val;  // lambda(m + i, m)
  std::vector<double> dval; // d lambda / d polar
};

inline void legendre_column(int m, int n_max, double x, double s,
                            LegendreColumn& col) {
  int count = n_max - m + 1;
  col.val.assign(count, 0.0);
  col.dval.assign(count, 0.0);
  // Seed lambda(m, m) = s^m * sqrt((2m+1)!! / (2 * (2m)!!)) built up stably.
  double lmm = std::sqrt(0.5);
  double dlmm = 0.0;
  for (int k = 1; k <= m; ++k) {
    double f = std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    double nv = f * s * lmm;
    double nd = f * (x * lmm + s * dlmm);
    lmm = nv;
    dlmm = nd;
  }
  col.val[0] = lmm;
  col.dval[0] = dlmm;
  if (count == 1) return;
  double f = std::sqrt(2.0 * m + 3.0);
  col.val[1] = f * x * lmm;
  col.dval[1] = f * (-s * lmm + x * dlmm);
  for (int n = m + 2; n <= n_max; ++n) {
    double nn = static_cast<double>(n);
    double a = std::sqrt((4.0 * nn * nn - 1.0) / (nn * nn - m * m));
    double b = std::sqrt(((2.0 * nn + 1.0) * (nn - 1.0 + m) * (nn - 1.0 - m)) /
                         ((2.0 * nn - 3.0) * (nn * nn - m * m)));
    int i = n - m;
    col.val[i] = a * x * col.val[i - 1] - b * col.val[i - 2];
    col.dval[i] = a * (-s * col.val[i - 1] + x * col.dval[i - 1]) - b * col.dval[i - 2];
  }
}

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2 pi)
inline constexpr double kInvSqrtPi = 0.56418958354775628695;   // 1/sqrt(pi)

}  // namespace detail

// Single basis function.
inline double eval_harmonic(int n, int m, double polar, double azimuth) {
  if (n < 0 || std::abs(m) > n)
    throw std::invalid_argument("eval_harmonic: need n >= 0 and |m| <= n");
  double x = std::cos(polar), s = std::sin(polar);
  int am = std::abs(m);
  detail::LegendreColumn col;
  detail::legendre_column(am, n, x, s, col);
  double lam = col.val[n - am];
  if (m == 0) return lam * detail::kInvSqrt2Pi;
  if (m > 0) return lam * std::cos(m * azimuth) * detail::kInvSqrtPi;
  return lam * std::sin(am * azimuth) * detail::kInvSqrtPi;
}

// Coefficient table over all (n, m) with n <= n_max.
class HarmonicCoeffs {
 public:
  HarmonicCoeffs() = default;
  explicit HarmonicCoeffs(int n_max)
      : n_max_(n_max), c_((n_max + 1) * (n_max + 1), 0.0) {
    if (n_max < 0) throw std::invalid_argument("HarmonicCoeffs: n_max < 0");
  }

  int n_max() const { return n_max_; }

  double coeff(int n, int m) const { return c_[index(n, m)]; }
  void set_coeff(int n, int m, double v) { c_[index(n, m)] = v; }

  // Sum of c(n,m)^2 over m at fixed n; orders above n_max carry no
  // coefficients and have zero energy.
  double mode_energy(int n) const {
    if (n < 0) throw std::invalid_argument("mode_energy: negative order");
    if (n > n_max_) return 0.0;
    KahanSum s;
    for (int m = -n; m <= n; ++m) {
      double v = coeff(n, m);
      s.add(v * v);
    }
    return s.value();
  }

  // Surface-gradient (Dirichlet) energy of the order-n component:
  // n(n+1) * mode_energy(n).
  double angular_energy(int n) const {
    if (n < 0) throw std::invalid_argument("angular_energy: negative order");
    return static_cast<double>(n) * (n + 1) * mode_energy(n);
  }

  double eval(double polar, double azimuth) const {
    double v, dp, da;
    eval_impl(polar, azimuth, false, v, dp, da);
    return v;
  }

  // Value plus partial derivatives with respect to polar and azimuth.
  void eval_with_gradient(double polar, double azimuth, double& value,
                          double& d_polar, double& d_azimuth) const {
    eval_impl(polar, azimuth, true, value, d_polar, d_azimuth);
  }

  // Estimated sup norm over the sphere (dense grid; adequate for the
  // embedding check on smooth profiles).
  double sup_norm_estimate() const {
    int np = std::max(64, 8 * (n_max_ + 1));
    int na = 2 * np;
    double best = std::max(std::abs(eval(0.0, 0.0)),
                           std::abs(eval(3.14159265358979323846, 0.0)));
    for (int i = 0; i < np; ++i) {
      double polar = 3.14159265358979323846 * (i + 0.5) / np;
      for (int j = 0; j < na; ++j) {
        double az = 2.0 * 3.14159265358979323846 * j / na;
        best = std::max(best, std::abs(eval(polar, az)));
      }
    }
    return best;
  }

 private:
  std::size_t index(int n, int m) const {
    if (n < 0 || n > n_max_ || std::abs(m) > n)
      throw std::invalid_argument("HarmonicCoeffs: index out of range");
    return static_cast<std::size_t>(n) * n + n + m;
  }

  void eval_impl(double polar, double azimuth, bool grad, double& value,
                 double& d_polar, double& d_azimuth) const {
    double x = std::cos(polar), s = std::sin(polar);
    KahanSum v, dp, da;
    detail::LegendreColumn col;
    for (int m = 0; m <= n_max_; ++m) {
      detail::legendre_column(m, n_max_, x, s, col);
      double cm = 1.0, sm = 0.0;
      if (m > 0) {
        cm = std::cos(m * azimuth);
        sm = std::sin(m * azimuth);
      }
      for (int n = m; n <= n_max_; ++n) {
        double lam = col.val[n - m], dlam = col.dval[n - m];
        if (m == 0) {
          double c0 = coeff(n, 0);
          if (c0 != 0.0) {
            v.add(c0 * lam * detail::kInvSqrt2Pi);
            if (grad) dp.add(c0 * dlam * detail::kInvSqrt2Pi);
          }
          continue;
        }
        double cc = coeff(n, m), cs = coeff(n, -m);
        if (cc == 0.0 && cs == 0.0) continue;
        double ang = cc * cm + cs * sm;
        double dang = m * (-cc * sm + cs * cm);
        v.add(lam * ang * detail::kInvSqrtPi);
        if (grad) {
          dp.add(dlam * ang * detail::kInvSqrtPi);
          da.add(lam * dang * detail::kInvSqrtPi);
        }
      }
    }
    value = v.value();
    d_polar = grad ? dp.value() : 0.0;
    d_azimuth = grad ? da.value() : 0.0;
  }

  int n_max_ = 0;
  std::vector<double> c_ = {0.0};
};

// Projection of an arbitrary smooth function onto the basis.  The polar
// direction uses Gauss-Legendre in cos(polar) and the azimuth a uniform
// rule, so band-limited integrands are integrated exactly.
template <class F>
HarmonicCoeffs expand(const F& f, int n_max) {
  HarmonicCoeffs out(n_max);
  int q = std::max(32, 2 * n_max + 8);
  int na = std::max(64, 4 * n_max + 16);
  GaussRule gl = gauss_legendre(q, -1.0, 1.0);
  const double pi = 3.14159265358979323846;

  // Cache f on the product grid.
  std::vector<double> fval(static_cast<std::size_t>(q) * na);
  std::vector<double> polar(q);
  for (int i = 0; i < q; ++i) {
    polar[i] = std::acos(gl.node[q - 1 - i]);  // ascending polar
    for (int j = 0; j < na; ++j)
      fval[static_cast<std::size_t>(i) * na + j] = f(polar[i], 2.0 * pi * j / na);
  }

  detail::LegendreColumn col;
  std::vector<KahanSum> acc(static_cast<std::size_t>(n_max + 1) * (n_max + 1));
  auto idx = [n_max](int n, int m) {
    return static_cast<std::size_t>(n) * n + n + m;
  };
  for (int i = 0; i < q; ++i) {
    double w = gl.weight[q - 1 - i] * (2.0 * pi / na);
    double x = std::cos(polar[i]), s = std::sin(polar[i]);
    for (int m = 0; m <= n_max; ++m) {
      detail::legendre_column(m, n_max, x, s, col);
      for (int j = 0; j < na; ++j) {
        double fw = fval[static_cast<std::size_t>(i) * na + j] * w;
        if (fw == 0.0) continue;
        double az = 2.0 * pi * j / na;
        double cm = (m == 0) ? detail::kInvSqrt2Pi
                             : std::cos(m * az) * detail::kInvSqrtPi;
        double sm = (m == 0) ? 0.0 : std::sin(m * az) * detail::kInvSqrtPi;
        for (int n = m; n <= n_max; ++n) {
          double lam = col.val[n - m];
          acc[idx(n, m)].add(fw * lam * cm);
          if (m > 0) acc[idx(n, -m)].add(fw * lam * sm);
        }
      }
    }
  }
  for (int n = 0; n <= n_max; ++n)
    for (int m = -n; m <= n; ++m) out.set_coeff(n, m, acc[idx(n, m)].value());
  return out;
}

// Coefficient files: one "n m value" triple per line, '#' comments allowed.
inline HarmonicCoeffs read_harmonic_coeffs(std::istream& in) {
  struct Triple {
    int n, m;
    double v;
  };
  std::vector<Triple> triples;
  int n_max = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int n, m;
    double v;
    if (!(ls >> n)) continue;  // blank or comment-only line
    if (!(ls >> m >> v))
      throw ConfigError("coefficient file: malformed line " + std::to_string(lineno));
    if (n < 0 || std::abs(m) > n)
      throw ConfigError("coefficient file: invalid mode on line " + std::to_string(lineno));
    triples.push_back({n, m, v});
    n_max = std::max(n_max, n);
  }
  HarmonicCoeffs out(n_max);
  for (const auto& t : triples)
    out.set_coeff(t.n, t.m, out.coeff(t.n, t.m) + t.v);
  return out;
}

inline HarmonicCoeffs read_harmonic_coeffs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coefficient file: " + path);
  return read_harmonic_coeffs(in);
}

}  // namespace deltashell
