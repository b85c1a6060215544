#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "deltashell/deltashell.hpp"
#include "oracles.hpp"

using namespace deltashell;

namespace {

SurfaceSpec sphere_spec(double R = 1.0) {
  SurfaceSpec s;
  s.kind = SurfaceKind::sphere;
  s.radius = R;
  return s;
}
SurfaceSpec spheroid_spec() {
  SurfaceSpec s;
  s.kind = SurfaceKind::spheroid;
  s.axis_a = 2.0;
  s.axis_b = 1.0;
  return s;
}
SurfaceSpec harmonic_spec() {
  SurfaceSpec s;
  s.kind = SurfaceKind::radial_harmonic;
  s.radius = 1.0;
  s.epsilon = 0.2;
  s.rho = HarmonicCoeffs(2);
  s.rho.set_coeff(2, 0, 1.0);
  return s;
}
SurfaceSpec bump_spec(double eps) {
  SurfaceSpec s;
  s.kind = SurfaceKind::revolution;
  s.epsilon = eps;
  s.profile = bump_profile();
  return s;
}

}  // namespace

TEST_CASE("classification trichotomy on the unit sphere", "[spectrum]") {
  SurfaceMesh m = build_mesh(sphere_spec(), 2);
  {
    SpectralVerdict v =
        classify(m, DensityWeight::constant_strength(m, 0.5));
    REQUIRE(v.classification == Criticality::subcritical);
    REQUIRE(v.lambda_at_zero < 0.51);
    REQUIRE(!v.ground_state.has_value());
  }
  {
    // The discrete top eigenvalue sits just below 1; the default band
    // absorbs the discretization error.
    SpectralVerdict v = classify(m, DensityWeight::constant_strength(m, 1.0));
    REQUIRE(v.classification == Criticality::critical_band);
    REQUIRE(std::abs(v.lambda_at_zero - 1.0) < 0.02);
    REQUIRE(!v.ground_state.has_value());
  }
  {
    SpectralVerdict v = classify(m, DensityWeight::constant_strength(m, 2.0));
    REQUIRE(v.classification == Criticality::supercritical);
    REQUIRE(v.lambda_at_zero > 1.9);
    REQUIRE(v.ground_state.has_value());
    REQUIRE(v.ground_state->kappa_star > 0.0);
    REQUIRE(v.ground_state->energy ==
            -v.ground_state->kappa_star * v.ground_state->kappa_star);
    REQUIRE(std::abs(v.ground_state->g_residual) < 1e-10);
    REQUIRE(v.ground_state->evaluations >= 3);
  }
  {
    // A razor-thin band reclassifies the same operator as subcritical.
    SpectralVerdict v =
        classify(m, DensityWeight::constant_strength(m, 1.0), 1e-3);
    REQUIRE(v.classification == Criticality::subcritical);
  }
  REQUIRE_THROWS_AS(classify(m, DensityWeight::constant_strength(m, 1.0), -0.1),
                    std::invalid_argument);
}

TEST_CASE("bound-state kappa against the scalar sphere equation",
          "[spectrum]") {
  // Independent truth: own bisection on alpha0 (1 - e^{-2k})/(2k) = 1.
  double truth = oracle::swave_kappa(1.5, 1.0);
  REQUIRE(std::abs(truth - 0.437108732899) < 1e-9);  // pinned value
  // The library's mesh-free scalar solver must agree with the oracle.
  REQUIRE(std::abs(sphere_swave_kappa(1.5, 1.0) - truth) < 1e-12);

  // The mesh pipeline converges to the same kappa under refinement.
  std::vector<double> roots;
  BoundStateOptions bo;
  for (int L = 1; L <= 3; ++L) {
    SurfaceMesh m = build_mesh(sphere_spec(), L);
    GroundState gs = ground_state(m, DensityWeight::constant_strength(m, 1.5), bo);
    roots.push_back(gs.kappa_star);
    REQUIRE(std::abs(gs.g_residual) < 1e-10);
    bo.bracket_lo = 0.8 * gs.kappa_star;  // warm-start the next level
    bo.bracket_hi = 1.25 * gs.kappa_star;
  }
  REQUIRE(std::abs(roots.back() - truth) < 0.01 * truth);
  REQUIRE(std::abs(richardson(roots).value - truth) < 1e-3 * truth);
}

TEST_CASE("scalar sphere solver input validation", "[spectrum]") {
  REQUIRE_THROWS_AS(sphere_swave_kappa(1.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(sphere_swave_kappa(0.5, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(sphere_swave_kappa(2.0, 0.4), std::invalid_argument);
  // Radius scaling: kappa*(alpha0, R) = kappa*(alpha0 R, 1) / R.
  double a = sphere_swave_kappa(1.5, 2.0);
  double b = oracle::swave_kappa(1.5, 2.0);
  REQUIRE(std::abs(a - b) < 1e-12);
}

TEST_CASE("screened eigenvalue against the closed sphere form", "[spectrum]") {
  // lambda(kappa) = (1 - e^{-2 kappa}) / (2 kappa) for the unit sphere at
  // constant unit strength.
  for (double kappa : {0.1, 0.5, 1.0, 2.0}) {
    std::vector<double> lam;
    for (int L = 1; L <= 3; ++L) {
      SurfaceMesh m = build_mesh(sphere_spec(), L);
      BsOperator op = assemble(m, kappa);
      lam.push_back(
          lambda_max(op, DensityWeight::constant_strength(m, 1.0)).lambda_max);
    }
    double truth = -std::expm1(-2.0 * kappa) / (2.0 * kappa);
    INFO("kappa = " << kappa);
    REQUIRE(std::abs(lam.back() - truth) < 5e-3 * truth);
    REQUIRE(std::abs(richardson(lam).value - truth) < 1e-3 * truth);
  }
}

TEST_CASE("kappa sweep is strictly decreasing and matches direct evaluation",
          "[spectrum]") {
  SurfaceMesh m = build_mesh(spheroid_spec(), 1);
  DensityWeight w = DensityWeight::constant_strength(m, 1.0);
  std::vector<double> grid = {0.0, 0.3, 0.8, 1.5};
  auto sweep = kappa_sweep(m, w, grid);
  REQUIRE(sweep.size() == grid.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    REQUIRE(sweep[i].first == grid[i]);
    if (i > 0) REQUIRE(sweep[i].second < sweep[i - 1].second);
  }
  double direct = lambda_max(assemble(m, 0.8), w).lambda_max;
  REQUIRE(std::abs(sweep[2].second - direct) < 1e-14 * direct);
}

TEST_CASE("row-sum certificate: values, soundness, monotonicity",
          "[spectrum]") {
  // Sphere at alpha0 = 1 is critical: the certificate must refuse to hold.
  {
    SurfaceMesh m = build_mesh(sphere_spec(), 2);
    Certificate cert = certificate(m, 1.0);
    REQUIRE(cert.gamma_inf < 1.0);
    REQUIRE(cert.gamma_inf > 0.98);
    REQUIRE(cert.threshold == 2.0 * cert.gamma_inf);
    REQUIRE(!cert.holds);
    REQUIRE(std::abs(cert.lambda_at_zero - 1.0) < 0.02);
  }
  // The small-area bump surface is deep in certificate territory.
  {
    SurfaceMesh m = build_mesh(bump_spec(1.0), 2);
    BsOperator op = assemble(m, 0.0);
    Certificate cert = certificate(op, 1.0);
    REQUIRE(cert.holds);
    REQUIRE(cert.threshold < 0.6);
    REQUIRE(cert.lambda_at_zero < 0.5);
    // Mesh-level overload matches.
    Certificate again = certificate(m, 1.0);
    REQUIRE(again.gamma_inf == cert.gamma_inf);
    REQUIRE(again.threshold == cert.threshold);
  }
  // Soundness across surfaces and strengths: whenever the certificate
  // holds, the kappa = 0 eigenvalue is genuinely below 1.
  for (const SurfaceSpec& s :
       {sphere_spec(), spheroid_spec(), harmonic_spec(), bump_spec(1.0)}) {
    SurfaceMesh m = build_mesh(s, 1);
    BsOperator op = assemble(m, 0.0);
    for (double a0 : {0.2, 0.5, 1.0, 2.0}) {
      Certificate cert = certificate(op, a0);
      if (cert.holds) {
        REQUIRE(cert.lambda_at_zero < 1.0);
        // The eigenvalue bound is exactly what makes it sound discretely:
        REQUIRE(a0 * gamma_inf_norm(op).value < 1.0);
      }
    }
  }
  // Shrinking the bump shrinks the row-sum norm.
  double g1 = gamma_inf_norm(build_mesh(bump_spec(1.0), 1)).value;
  double g2 = gamma_inf_norm(build_mesh(bump_spec(0.5), 1)).value;
  REQUIRE(g2 < g1);
  // Error paths.
  SurfaceMesh m = build_mesh(sphere_spec(), 0);
  REQUIRE_THROWS_AS(certificate(m, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(certificate(m, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(certificate(assemble(m, 0.5), 1.0), std::invalid_argument);
}

TEST_CASE("bound-state bracketing options", "[spectrum]") {
  SurfaceMesh m = build_mesh(sphere_spec(), 1);
  DensityWeight w = DensityWeight::constant_strength(m, 1.5);
  GroundState base = ground_state(m, w);
  {
    // A tight explicit bracket converges to the same root with less work.
    BoundStateOptions bo;
    bo.bracket_lo = 0.3;
    bo.bracket_hi = 0.6;
    GroundState gs = ground_state(m, w, bo);
    REQUIRE(std::abs(gs.kappa_star - base.kappa_star) < 1e-6);
    REQUIRE(gs.evaluations <= base.evaluations);
  }
  {
    // A too-small upper end widens itself until the root is bracketed.
    BoundStateOptions bo;
    bo.bracket_hi = 0.05;
    GroundState gs = ground_state(m, w, bo);
    REQUIRE(std::abs(gs.kappa_star - base.kappa_star) < 1e-6);
  }
  {
    // Lower end beyond the root: no sign change to work with.
    BoundStateOptions bo;
    bo.bracket_lo = 0.6;
    REQUIRE_THROWS_AS(ground_state(m, w, bo), std::invalid_argument);
  }
  {
    // Subcritical operator: g < 0 already at the default lower end.
    REQUIRE_THROWS_AS(
        ground_state(m, DensityWeight::constant_strength(m, 0.9)),
        std::invalid_argument);
  }
  {
    // Starved evaluation budget.
    BoundStateOptions bo;
    bo.max_evaluations = 4;
    REQUIRE_THROWS_AS(ground_state(m, w, bo), NumericalError);
  }
}
