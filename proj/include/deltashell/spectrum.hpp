#pragma once

// Criticality classification, bound-state location through the eigenvalue
// condition lambda_max(alpha Gamma(i kappa)) = 1, and the row-sum-norm
// certificate that excludes bound states.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "deltashell/bs_operator.hpp"
#include "deltashell/common.hpp"
#include "deltashell/mesh.hpp"

namespace deltashell {

enum class Criticality { subcritical, critical_band, supercritical };

inline const char* criticality_name(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical_band: return "critical";
    case Criticality::supercritical: return "supercritical";
  }
  return "?";
}

struct GroundState {
  double kappa_star = 0.0;
  double energy = 0.0;  // -kappa_star^2
  int evaluations = 0;  // operator assemblies spent by the root finder
  double g_residual = 0.0;
};

struct Certificate {
  double gamma_inf = 0.0;    // row-sum norm at kappa = 0
  double threshold = 0.0;    // 2 alpha0 gamma_inf
  bool holds = false;        // threshold < 1 excludes bound states
  double lambda_at_zero = 0.0;
};

struct SpectralVerdict {
  Criticality classification = Criticality::critical_band;
  double lambda_at_zero = 0.0;
  double tol_band = 0.0;
  std::optional<GroundState> ground_state;
  std::optional<Certificate> certificate;

  std::string keyed_text() const {
    std::string out;
    out += strfmt("classification = %s\n", criticality_name(classification));
    out += strfmt("lambda_at_zero = %s\n", fmt_g17(lambda_at_zero).c_str());
    out += strfmt("tol_band = %s\n", fmt_g17(tol_band).c_str());
    if (ground_state) {
      out += strfmt("kappa_star = %s\n", fmt_g17(ground_state->kappa_star).c_str());
      out += strfmt("energy = %s\n", fmt_g17(ground_state->energy).c_str());
      out += strfmt("root_evaluations = %d\n", ground_state->evaluations);
    }
    if (certificate) {
      out += strfmt("gamma_inf = %s\n", fmt_g17(certificate->gamma_inf).c_str());
      out += strfmt("certificate_threshold = %s\n",
                    fmt_g17(certificate->threshold).c_str());
      out += strfmt("certificate_holds = %d\n", certificate->holds ? 1 : 0);
    }
    return out;
  }
};

struct BoundStateOptions {
  double bracket_lo = 0.0;   // 0: default 1e-6
  double bracket_hi = 0.0;   // 0: default 10/extent, widened on demand
  double g_tol = 1e-10;      // |lambda - 1| at the root
  int max_evaluations = 80;
  AssemblyOptions assembly;
};

// kappa* with lambda_max(alpha Gamma(i kappa*)) = 1: bisection to localize,
// secant to polish.  g is continuous and strictly decreasing in kappa.
inline GroundState ground_state(const SurfaceMesh& mesh, const DensityWeight& alpha,
                                BoundStateOptions opt = {}) {
  int evals = 0;
  auto g = [&](double kappa) {
    ++evals;
    BsOperator op = assemble(mesh, kappa, opt.assembly);
    return lambda_max(op, alpha).lambda_max - 1.0;
  };

  double lo = opt.bracket_lo > 0.0 ? opt.bracket_lo : 1e-6;
  double hi = opt.bracket_hi > 0.0 ? opt.bracket_hi : 10.0 / mesh.extent();
  double glo = g(lo);
  if (glo <= 0.0)
    throw std::invalid_argument(
        "ground_state: no sign change in bracket (operator is not supercritical "
        "at the lower end)");
  double ghi = g(hi);
  int widen = 0;
  while (ghi > 0.0) {
    if (++widen > 40 || evals >= opt.max_evaluations)
      throw NumericalError("ground_state: could not bracket the root");
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    ghi = g(hi);
  }

  // Bisection until the interval is small relative to kappa.
  while (hi - lo > 1e-3 * (0.5 * (hi + lo)) && evals < opt.max_evaluations) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      glo = ghi = 0.0;
      break;
    }
    (gm > 0.0 ? lo : hi) = mid;
    (gm > 0.0 ? glo : ghi) = gm;
  }

  // Secant polish inside the bracket.
  double a = lo, fa = glo, b = hi, fb = ghi;
  double root = std::abs(fa) < std::abs(fb) ? a : b;
  double froot = std::abs(fa) < std::abs(fb) ? fa : fb;
  for (int it = 0; it < 40 && evals < opt.max_evaluations; ++it) {
    if (std::abs(fb - fa) < 1e-300) break;
    double x = b - fb * (b - a) / (fb - fa);
    if (!(x > lo) || !(x < hi)) x = 0.5 * (lo + hi);  // secant left the bracket
    double fx = g(x);
    root = x;
    froot = fx;
    if (std::abs(fx) < opt.g_tol) break;
    if (fx > 0.0) {
      lo = x;
      glo = fx;
    } else {
      hi = x;
      ghi = fx;
    }
    a = b;
    fa = fb;
    b = x;
    fb = fx;
  }
  if (std::abs(froot) >= opt.g_tol)
    throw NumericalError(strfmt(
        "ground_state: root not converged, |lambda - 1| = %g after %d evaluations",
        std::abs(froot), evals));

  GroundState gs;
  gs.kappa_star = root;
  gs.energy = -root * root;
  gs.evaluations = evals;
  gs.g_residual = froot;
  return gs;
}

// Row-sum-norm certificate: 2 alpha0 |Gamma|_inf < 1 excludes bound states;
// for the discrete positive matrix this bound is literally the inf-norm
// bound on the spectral radius, so it is sound level by level.
inline Certificate certificate(const BsOperator& op, double alpha0) {
  if (!(alpha0 > 0.0))
    throw std::invalid_argument("certificate: alpha0 must be > 0");
  if (op.kappa != 0.0)
    throw std::invalid_argument("certificate: needs the kappa = 0 operator");
  Certificate cert;
  cert.gamma_inf = gamma_inf_norm(op).value;
  cert.threshold = 2.0 * alpha0 * cert.gamma_inf;
  cert.holds = cert.threshold < 1.0;
  cert.lambda_at_zero =
      lambda_max(op, DensityWeight::constant_strength(op.mesh, alpha0)).lambda_max;
  return cert;
}

inline Certificate certificate(const SurfaceMesh& mesh, double alpha0,
                               AssemblyOptions opt = {}) {
  return certificate(assemble(mesh, 0.0, opt), alpha0);
}

// Trichotomy with an explicit tolerance band around lambda = 1; computes
// the ground state when supercritical so the verdict is self-contained.
inline SpectralVerdict classify(const SurfaceMesh& mesh, const DensityWeight& alpha,
                                double tol_band = 0.02,
                                BoundStateOptions opt = {}) {
  if (!(tol_band >= 0.0))
    throw std::invalid_argument("classify: tol_band must be >= 0");
  BsOperator op = assemble(mesh, 0.0, opt.assembly);
  SpectralVerdict verdict;
  verdict.lambda_at_zero = lambda_max(op, alpha).lambda_max;
  verdict.tol_band = tol_band;
  if (verdict.lambda_at_zero > 1.0 + tol_band) {
    verdict.classification = Criticality::supercritical;
    verdict.ground_state = ground_state(mesh, alpha, opt);
  } else if (verdict.lambda_at_zero < 1.0 - tol_band) {
    verdict.classification = Criticality::subcritical;
  } else {
    verdict.classification = Criticality::critical_band;
  }
  return verdict;
}

// For a radius-R sphere with constant strength alpha0 the lowest-mode
// eigenvalue condition reduces to the scalar equation
//   alpha0 (1 - exp(-2 kappa R)) / (2 kappa) = 1,
// obtained by matching exp(-kappa r)/r outside against sinh(kappa r)/r
// inside under the normal-derivative jump.  Solved here by bisection,
// independent of any mesh.
inline double sphere_swave_kappa(double alpha0, double R) {
  if (!(alpha0 * R > 1.0))
    throw std::invalid_argument(
        "sphere_swave_kappa: needs alpha0 R > 1 (supercritical)");
  auto f = [&](double k) {
    return alpha0 * -std::expm1(-2.0 * k * R) / (2.0 * k) - 1.0;
  };
  double lo = 1e-12 / R, hi = alpha0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// lambda_max(alpha Gamma(i kappa)) over a kappa grid, for sweep tables.
inline std::vector<std::pair<double, double>> kappa_sweep(
    const SurfaceMesh& mesh, const DensityWeight& alpha,
    const std::vector<double>& kappa_grid, AssemblyOptions opt = {}) {
  std::vector<std::pair<double, double>> out;
  out.reserve(kappa_grid.size());
  for (double k : kappa_grid) {
    BsOperator op = assemble(mesh, k, opt);
    out.emplace_back(k, lambda_max(op, alpha).lambda_max);
  }
  return out;
}

}  // namespace deltashell
