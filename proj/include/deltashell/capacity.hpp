#pragma once

// Electrostatic equilibrium on the surface: capacity, equilibrium charge
// density, the Gauss energy functional, and the two-part criticality check
// (unit eigenvalue of the sigma-weighted operator; interaction radius vs.
// capacity).

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "deltashell/bs_operator.hpp"
#include "deltashell/common.hpp"
#include "deltashell/mesh.hpp"

namespace deltashell {

struct CapacityResult {
  double C = 0.0;                  // capacity (length)
  std::vector<double> sigma;       // per-panel equilibrium density, unit charge
  double residual = 0.0;           // max |potential - 1/C| * C at collocation
  double gauss_energy = 0.0;       // energy of sigma, expected 1/C
  double min_sigma = 0.0, max_sigma = 0.0;
  bool sigma_positive = false;
  int level = 0;
  int panels = 0;

  std::string keyed_text() const {
    std::string out;
    out += strfmt("capacity = %s\n", fmt_g17(C).c_str());
    out += strfmt("residual = %s\n", fmt_g17(residual).c_str());
    out += strfmt("gauss_energy = %s\n", fmt_g17(gauss_energy).c_str());
    out += strfmt("min_sigma = %s\n", fmt_g17(min_sigma).c_str());
    out += strfmt("max_sigma = %s\n", fmt_g17(max_sigma).c_str());
    out += strfmt("sigma_positive = %d\n", sigma_positive ? 1 : 0);
    out += strfmt("level = %d\n", level);
    out += strfmt("panels = %d\n", panels);
    return out;
  }
};

// Equilibrium problem in charge coordinates q_j = sigma_j * area_j:
//   | 4 pi K   -1 | | q |   | 0 |
//   |  1^T      0 | | c | = | 1 |
// where K is the symmetrized kernel-mean matrix, so the potential is the
// same constant c at every collocation point and the total charge is one;
// the capacity is C = 1/c.
inline CapacityResult solve_equilibrium(const BsOperator& op) {
  if (!op.dense)
    throw std::invalid_argument("solve_equilibrium: needs a dense operator");
  if (op.kappa != 0.0)
    throw std::invalid_argument("solve_equilibrium: needs the kappa = 0 operator");
  int n = op.size();
  const auto& area = op.mesh.area;

  Eigen::MatrixXd A(n + 1, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) = kFourPi * op.matrix(i, j) / area[j];  // 4 pi K
  for (int i = 0; i < n; ++i) {
    A(i, n) = -1.0;
    A(n, i) = 1.0;
  }
  A(n, n) = 0.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(std::move(A));
  Eigen::VectorXd sol = lu.solve(rhs);
  double c = sol[n];
  if (!std::isfinite(c) || !(c > 0.0))
    throw NumericalError("solve_equilibrium: singular or indefinite system");

  CapacityResult res;
  res.C = 1.0 / c;
  res.level = op.mesh.level;
  res.panels = n;
  res.sigma.resize(n);
  res.min_sigma = std::numeric_limits<double>::infinity();
  res.max_sigma = -res.min_sigma;
  for (int j = 0; j < n; ++j) {
    double s = sol[j] / area[j];
    res.sigma[j] = s;
    res.min_sigma = std::min(res.min_sigma, s);
    res.max_sigma = std::max(res.max_sigma, s);
  }
  res.sigma_positive = res.min_sigma > 0.0;

  // Residual of the potential equation, relative to the potential itself.
  Eigen::VectorXd pot = kFourPi * op.apply(Eigen::Map<const Eigen::VectorXd>(
                                      res.sigma.data(), n));
  double dev = 0.0;
  for (int i = 0; i < n; ++i) dev = std::max(dev, std::abs(pot[i] - c));
  res.residual = dev / c;

  // Energy of sigma: c times unit total charge, but evaluate it honestly.
  KahanSum e;
  for (int i = 0; i < n; ++i) e.add(res.sigma[i] * area[i] * pot[i]);
  res.gauss_energy = e.value();
  return res;
}

inline CapacityResult solve_equilibrium(const SurfaceMesh& mesh,
                                        AssemblyOptions opt = {}) {
  return solve_equilibrium(assemble(mesh, 0.0, opt));
}

// Double-layer energy of a unit-charge density mu:
//   E(mu) = IntInt mu(x) mu(y) / |x - y| dnu dnu = 4 pi q^T K q.
inline double gauss_energy(const BsOperator& op, const std::vector<double>& mu) {
  int n = op.size();
  if (static_cast<int>(mu.size()) != n)
    throw std::invalid_argument("gauss_energy: density size mismatch");
  KahanSum q;
  for (int j = 0; j < n; ++j) {
    if (mu[j] < 0.0)
      throw std::invalid_argument("gauss_energy: density must be nonnegative");
    q.add(mu[j] * op.mesh.area[j]);
  }
  if (std::abs(q.value() - 1.0) > 1e-10)
    throw std::invalid_argument(strfmt(
        "gauss_energy: density integrates to %.17g, not 1", q.value()));
  Eigen::VectorXd y =
      op.apply(Eigen::Map<const Eigen::VectorXd>(mu.data(), n));
  KahanSum e;
  for (int i = 0; i < n; ++i) e.add(kFourPi * mu[i] * op.mesh.area[i] * y[i]);
  return e.value();
}

inline double gauss_energy(const SurfaceMesh& mesh, const std::vector<double>& mu,
                           AssemblyOptions opt = {}) {
  return gauss_energy(assemble(mesh, 0.0, opt), mu);
}

// Two linked checks of equilibrium criticality on one mesh:
// (a) the operator weighted by 4 pi C sigma has top eigenvalue 1;
// (b) the interaction radius of the constant relative density is at most C.
struct EquilibriumCriticalityReport {
  CapacityResult capacity;
  double lambda_sigma = 0.0;          // expected -> 1
  CriticalityReport crit_uniform;     // constant relative density
  double gap = 0.0;                   // C - interaction_radius, expected >= 0

  std::string keyed_text() const {
    std::string out;
    out += strfmt("capacity = %s\n", fmt_g17(capacity.C).c_str());
    out += strfmt("lambda_sigma_weight = %s\n", fmt_g17(lambda_sigma).c_str());
    out += strfmt("interaction_radius = %s\n",
                  fmt_g17(crit_uniform.interaction_radius).c_str());
    out += strfmt("gap = %s\n", fmt_g17(gap).c_str());
    out += strfmt("level = %d\n", capacity.level);
    out += strfmt("panels = %d\n", capacity.panels);
    return out;
  }
};

inline EquilibriumCriticalityReport verify_equilibrium_criticality(const BsOperator& op,
                                      const CapacityResult& cap) {
  EquilibriumCriticalityReport rep;
  rep.capacity = cap;
  if (!rep.capacity.sigma_positive)
    throw NumericalError(
        "verify_equilibrium_criticality: equilibrium density not positive at this resolution");
  int n = op.size();
  DensityWeight w_sigma;
  w_sigma.value.resize(n);
  for (int j = 0; j < n; ++j)
    w_sigma.value[j] = kFourPi * rep.capacity.C * rep.capacity.sigma[j];
  rep.lambda_sigma = lambda_max(op, w_sigma).lambda_max;
  rep.crit_uniform = lambda_max(op, DensityWeight::uniform_relative(op.mesh));
  rep.gap = rep.capacity.C - rep.crit_uniform.interaction_radius;
  return rep;
}

inline EquilibriumCriticalityReport verify_equilibrium_criticality(const BsOperator& op) {
  return verify_equilibrium_criticality(op, solve_equilibrium(op));
}

inline EquilibriumCriticalityReport verify_equilibrium_criticality(const SurfaceMesh& mesh,
                                      AssemblyOptions opt = {}) {
  return verify_equilibrium_criticality(assemble(mesh, 0.0, opt));
}

}  // namespace deltashell
