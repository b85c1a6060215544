#pragma once

// Surface families: sphere, radially deformed sphere (harmonic profile),
// spheroid, and a thin surface of revolution
//   x = eps*f(v) cos u,  y = eps*f(v) sin u,  z = v/eps,   v in [-1, 1],
// with an admissible profile: f > 0 inside, f(+-1) = 0, 2*pi*Int f dv = 1.

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "deltashell/common.hpp"
#include "deltashell/harmonics.hpp"
#include "deltashell/quadrature.hpp"

namespace deltashell {

namespace detail {

// Shape-preserving cubic interpolant (Fritsch-Carlson slopes) for tabulated
// revolution profiles.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    std::size_t n = x_.size();
    if (n < 4 || y_.size() != n)
      throw ConfigError("profile table: need at least 4 samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw ConfigError("profile table: abscissae must strictly increase");
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (del[i - 1] * del[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        double w1 = 2.0 * h[i] + h[i - 1];
        double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
      }
    }
    d_[0] = edge_slope(h[0], h[1], del[0], del[1]);
    d_[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }

  double eval(double x) const {
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
    double y0 = y_[i], y1 = y_[i + 1], d0 = d_[i] * h, d1 = d_[i + 1] * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
  }

  double deriv(double x) const {
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
    double y0 = y_[i], y1 = y_[i + 1], d0 = d_[i] * h, d1 = d_[i + 1] * h;
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * d0 +
            (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * d1) / h;
  }

  // Exact integral of the piecewise cubic over the full table range.
  double integral() const {
    KahanSum s;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      double h = x_[i + 1] - x_[i];
      s.add(0.5 * h * (y_[i] + y_[i + 1]) + h * h * (d_[i] - d_[i + 1]) / 12.0);
    }
    return s.value();
  }

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }

 private:
  static double edge_slope(double h0, double h1, double del0, double del1) {
    double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (d * del0 <= 0.0) return 0.0;
    if (del0 * del1 <= 0.0 && std::abs(d) > 3.0 * std::abs(del0))
      return 3.0 * del0;
    return d;
  }

  std::size_t segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    std::size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (x_[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  }

  std::vector<double> x_, y_, d_;
};

}  // namespace detail

// Generator profile of a revolution surface: f on [-1, 1].  f*f' is kept as
// its own callback because the built-in bump has f'(+-1) infinite while
// f*f' stays bounded, and only the product enters the surface measure.
struct RevolutionProfile {
  std::string name;                        // "bump" or "table:<path>"
  std::function<double(double)> f;
  std::function<double(double)> f_fprime;  // f(v) * f'(v)
  double integral = 0.0;                   // Int_{-1}^{1} f dv
  std::vector<double> breakpoints;         // quadrature segmentation hints
};

// Built-in admissible profile f(v) = sqrt(1 - v^2) / pi^2, normalized so
// that 2*pi*Int f dv = 1.
inline RevolutionProfile bump_profile() {
  const double pi = 3.14159265358979323846;
  RevolutionProfile p;
  p.name = "bump";
  double inv_pi2 = 1.0 / (pi * pi);
  p.f = [inv_pi2](double v) {
    return std::sqrt(std::max(0.0, 1.0 - v * v)) * inv_pi2;
  };
  double inv_pi4 = inv_pi2 * inv_pi2;
  p.f_fprime = [inv_pi4](double v) { return -v * inv_pi4; };
  p.integral = 0.5 / pi;  // Int sqrt(1-v^2) = pi/2
  p.breakpoints = {-1.0, 1.0};
  return p;
}

// Tabulated profile: text lines "v f", '#' comments; samples must span
// [-1, 1] with vanishing ends.
inline RevolutionProfile table_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile table: " + path);
  std::vector<double> xs, ys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v, fv;
    if (!(ls >> v)) continue;
    if (!(ls >> fv))
      throw ConfigError("profile table: malformed line " + std::to_string(lineno));
    xs.push_back(v);
    ys.push_back(fv);
  }
  if (xs.empty() || std::abs(xs.front() + 1.0) > 1e-12 ||
      std::abs(xs.back() - 1.0) > 1e-12)
    throw ConfigError("profile table: samples must span [-1, 1]");
  auto interp = std::make_shared<detail::MonotoneCubic>(std::move(xs), std::move(ys));
  RevolutionProfile p;
  p.name = "table:" + path;
  p.f = [interp](double v) { return interp->eval(v); };
  p.f_fprime = [interp](double v) { return interp->eval(v) * interp->deriv(v); };
  p.integral = interp->integral();
  p.breakpoints = interp->knots();
  return p;
}

enum class SurfaceKind { sphere, radial_harmonic, revolution, spheroid };

inline const char* kind_name(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::radial_harmonic: return "radial-harmonic";
    case SurfaceKind::revolution: return "revolution";
    case SurfaceKind::spheroid: return "spheroid";
  }
  return "?";
}

// Declarative surface description.  `radius` is the sphere radius R or the
// deformation base radius r0; the spheroid has polar semi-axis `axis_a`
// (along z) and equatorial semi-axis `axis_b`.
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::sphere;
  double radius = 1.0;
  double epsilon = 0.0;
  HarmonicCoeffs rho;         // radial_harmonic profile
  double axis_a = 1.0;
  double axis_b = 1.0;
  RevolutionProfile profile;  // revolution generator

  std::string summary() const {
    switch (kind) {
      case SurfaceKind::sphere:
        return strfmt("sphere R=%g", radius);
      case SurfaceKind::radial_harmonic:
        return strfmt("radial-harmonic r0=%g eps=%g n_max=%d", radius, epsilon,
                      rho.n_max());
      case SurfaceKind::revolution:
        return strfmt("revolution profile=%s eps=%g", profile.name.c_str(),
                      epsilon);
      case SurfaceKind::spheroid:
        return strfmt("spheroid a=%g b=%g", axis_a, axis_b);
    }
    return "?";
  }

  // Throws ConfigError when the description is unusable.
  void validate() const {
    switch (kind) {
      case SurfaceKind::sphere:
        if (!(radius > 0.0)) throw ConfigError("sphere: radius must be > 0");
        break;
      case SurfaceKind::radial_harmonic: {
        if (!(radius > 0.0)) throw ConfigError("radial-harmonic: r0 must be > 0");
        if (epsilon < 0.0) throw ConfigError("radial-harmonic: epsilon must be >= 0");
        if (epsilon > 0.0) {
          double sup = rho.sup_norm_estimate();
          if (epsilon * sup >= 1.0)
            throw ConfigError(strfmt(
                "radial-harmonic: embedding violated, eps*sup|rho| = %g >= 1",
                epsilon * sup));
        }
        break;
      }
      case SurfaceKind::revolution: {
        if (!(epsilon > 0.0)) throw ConfigError("revolution: epsilon must be > 0");
        if (!profile.f) throw ConfigError("revolution: no profile");
        const double pi = 3.14159265358979323846;
        double norm = 2.0 * pi * profile.integral;
        if (std::abs(norm - 1.0) > 1e-8)
          throw ConfigError(strfmt(
              "revolution: profile not normalized, 2*pi*integral = %.12g", norm));
        if (std::abs(profile.f(-1.0)) > 1e-10 || std::abs(profile.f(1.0)) > 1e-10)
          throw ConfigError("revolution: profile must vanish at v = +-1");
        for (int i = 1; i < 400; ++i) {
          double v = -1.0 + 2.0 * i / 400.0;
          if (!(profile.f(v) > 0.0))
            throw ConfigError(strfmt("revolution: profile not positive at v = %g", v));
        }
        break;
      }
      case SurfaceKind::spheroid:
        if (!(axis_a > 0.0) || !(axis_b > 0.0))
          throw ConfigError("spheroid: semi-axes must be > 0");
        break;
    }
  }

  bool has_radial_map() const { return kind != SurfaceKind::revolution; }
};

// Star-shaped kinds as a radial graph r(polar, azimuth) over the unit
// sphere, with first derivatives (used for meshing and exact areas).
struct RadialSample {
  double r, dr_dpolar, dr_dazimuth;
};

inline RadialSample radial_map(const SurfaceSpec& spec, double polar,
                               double azimuth) {
  switch (spec.kind) {
    case SurfaceKind::sphere:
      return {spec.radius, 0.0, 0.0};
    case SurfaceKind::radial_harmonic: {
      if (spec.epsilon == 0.0) return {spec.radius, 0.0, 0.0};
      double v, dp, da;
      spec.rho.eval_with_gradient(polar, azimuth, v, dp, da);
      return {spec.radius * (1.0 + spec.epsilon * v),
              spec.radius * spec.epsilon * dp,
              spec.radius * spec.epsilon * da};
    }
    case SurfaceKind::spheroid: {
      double s = std::sin(polar), c = std::cos(polar);
      double ia = 1.0 / (spec.axis_a * spec.axis_a);
      double ib = 1.0 / (spec.axis_b * spec.axis_b);
      double q = s * s * ib + c * c * ia;
      double r = 1.0 / std::sqrt(q);
      double dr = -r * r * r * s * c * (ib - ia);
      return {r, dr, 0.0};
    }
    case SurfaceKind::revolution:
      throw std::logic_error("radial_map: revolution surface is not star-shaped");
  }
  return {0, 0, 0};
}

// Radius of the sphere with the same area.
inline double surface_radius(double area) {
  if (!(area > 0.0)) throw std::invalid_argument("surface_radius: area must be > 0");
  return std::sqrt(area / (4.0 * 3.14159265358979323846));
}

// Exact (quadrature) surface area of the parametrized surface, independent
// of any mesh.  Radial graphs use
//   dS = sqrt(r^4 + r^2 r_p^2 + r^2 (r_a / sin p)^2) sin p  dp da,
// revolution surfaces use dS = 2 pi sqrt(f^2 + eps^4 (f f')^2) dv.
inline double true_area(const SurfaceSpec& spec) {
  const double pi = 3.14159265358979323846;
  spec.validate();
  if (spec.kind == SurfaceKind::sphere) return 4.0 * pi * spec.radius * spec.radius;
  if (spec.kind == SurfaceKind::revolution) {
    double e4 = spec.epsilon * spec.epsilon * spec.epsilon * spec.epsilon;
    KahanSum s;
    const auto& bp = spec.profile.breakpoints;
    auto integrand = [&](double v) {
      double f = spec.profile.f(v);
      double ffp = spec.profile.f_fprime(v);
      return std::sqrt(f * f + e4 * ffp * ffp);
    };
    for (std::size_t seg = 0; seg + 1 < bp.size(); ++seg) {
      // Profiles vanish like sqrt at the caps, so straight Gauss points on a
      // cap segment converge slowly (badly so for thin spindles).  The
      // substitution v = mid - half*cos(t) absorbs that endpoint behavior.
      bool cap = (seg == 0) || (seg + 2 == bp.size());
      double half = 0.5 * (bp[seg + 1] - bp[seg]);
      double mid = 0.5 * (bp[seg + 1] + bp[seg]);
      if (cap) {
        GaussRule gl = gauss_legendre(bp.size() > 2 ? 32 : 256, 0.0, pi);
        for (std::size_t i = 0; i < gl.node.size(); ++i) {
          double t = gl.node[i];
          s.add(gl.weight[i] * half * std::sin(t) *
                integrand(mid - half * std::cos(t)));
        }
      } else {
        GaussRule gl = gauss_legendre(16, bp[seg], bp[seg + 1]);
        for (std::size_t i = 0; i < gl.node.size(); ++i)
          s.add(gl.weight[i] * integrand(gl.node[i]));
      }
    }
    return 2.0 * pi * s.value();
  }
  // Radial graph: Gauss-Legendre in cos(polar) x uniform azimuth.
  int q = 128, na = 256;
  GaussRule gl = gauss_legendre(q, -1.0, 1.0);
  KahanSum total;
  for (int i = 0; i < q; ++i) {
    double polar = std::acos(gl.node[i]);
    double s = std::sin(polar);
    KahanSum ring;
    for (int j = 0; j < na; ++j) {
      RadialSample m = radial_map(spec, polar, 2.0 * pi * j / na);
      double ra = m.dr_dazimuth / s;
      ring.add(std::sqrt(m.r * m.r * (m.r * m.r + m.dr_dpolar * m.dr_dpolar + ra * ra)));
    }
    total.add(gl.weight[i] * ring.value() * (2.0 * pi / na));
  }
  return total.value();
}

}  // namespace deltashell
