#pragma once

// The screened single-layer operator on a panel mesh:
//   (G x)_i = sum_j G_ij x_j,
//   G_ij = (1/4pi) Int_{T_j} exp(-kappa |c_i - y|)/|c_i - y| dA(y),
// with the area-weighted kernel symmetrized so the weighted eigenproblem
// is that of a real symmetric positive matrix.  Provides the largest and
// second eigenvalue (power iteration with Rayleigh quotients), critical
// strength, the row-sum norm, and a binary matrix dump.

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "deltashell/common.hpp"
#include "deltashell/mesh.hpp"
#include "deltashell/panel_integrals.hpp"

namespace deltashell {

inline constexpr int kDensePanelLimit = 6000;
inline constexpr double kFourPi = 4.0 * 3.14159265358979323846;

struct AssemblyOptions {
  int threads = 0;                      // 0: hardware default
  int dense_limit = kDensePanelLimit;   // above this, matrix-free
};

class BsOperator {
 public:
  SurfaceMesh mesh;
  double kappa = 0.0;
  bool dense = true;
  Eigen::MatrixXd matrix;  // value-coordinate entries (dense mode only)
  int threads = 1;

  int size() const { return mesh.panel_count(); }

  // Raw collocation integral over panel j seen from centroid i, including
  // the 1/(4 pi) but before symmetrization.
  double raw_entry(int i, int j) const {
    const auto& t = mesh.triangles[j];
    const Eigen::Vector3d &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]],
                          &c = mesh.vertices[t[2]];
    const Eigen::Vector3d& p = mesh.centroid[i];
    double val;
    if (i == j) {
      val = panels::self_integral(p, a, b, c, mesh.area[j], kappa);
    } else {
      double d = (p - mesh.centroid[j]).norm();
      if (d > 4.0 * panel_radius_[j])
        val = panels::far_integral(p, a, b, c, mesh.area[j], kappa);
      else
        val = panels::near_integral(p, a, b, c, mesh.area[j], kappa, 0);
    }
    return val / kFourPi;
  }

  // Symmetrized entry: the kernel mean 0.5*(G_ij/A_j + G_ji/A_i) times A_j.
  double entry(int i, int j) const {
    if (dense) return matrix(i, j);
    if (i == j) return raw_entry(i, i);
    return 0.5 * (raw_entry(i, j) + raw_entry(j, i) * mesh.area[j] / mesh.area[i]);
  }

  // y = G x in value coordinates; bitwise independent of the thread count.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (dense) return matrix * x;
    int n = size();
    Eigen::VectorXd y(n);
    parallel_for(static_cast<std::size_t>(n), threads,
                 [&](std::size_t lo, std::size_t hi) {
                   for (std::size_t i = lo; i < hi; ++i) {
                     double acc = 0.0;
                     for (int j = 0; j < n; ++j)
                       acc += entry(static_cast<int>(i), j) * x[j];
                     y[static_cast<long>(i)] = acc;
                   }
                 });
    return y;
  }

  const std::vector<double>& panel_radius() const { return panel_radius_; }

  friend BsOperator assemble(const SurfaceMesh&, double, AssemblyOptions);

 private:
  std::vector<double> panel_radius_;  // max vertex distance from centroid
};

inline BsOperator assemble(const SurfaceMesh& mesh, double kappa,
                           AssemblyOptions opt = {}) {
  if (kappa < 0.0) throw std::invalid_argument("assemble: kappa must be >= 0");
  BsOperator op;
  op.mesh = mesh;
  op.kappa = kappa;
  op.threads = opt.threads;
  int n = mesh.panel_count();
  op.panel_radius_.resize(n);
  for (int j = 0; j < n; ++j) {
    const auto& t = mesh.triangles[j];
    double r2 = 0.0;
    for (int k = 0; k < 3; ++k)
      r2 = std::max(r2, (mesh.vertices[t[k]] - mesh.centroid[j]).squaredNorm());
    op.panel_radius_[j] = std::sqrt(r2);
  }
  op.dense = n <= opt.dense_limit;
  if (!op.dense) return op;

  op.matrix.resize(n, n);
  parallel_for(static_cast<std::size_t>(n), opt.threads,
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t i = lo; i < hi; ++i)
                   for (int j = 0; j < n; ++j)
                     op.matrix(static_cast<long>(i), j) =
                         op.raw_entry(static_cast<int>(i), j);
               });
  // Symmetrize the kernel means; collocation breaks symmetry at O(h^2) and
  // the continuum operator is symmetric.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double km = 0.5 * (op.matrix(i, j) / mesh.area[j] +
                         op.matrix(j, i) / mesh.area[i]);
      op.matrix(i, j) = km * mesh.area[j];
      op.matrix(j, i) = km * mesh.area[i];
    }
  return op;
}

// Positive per-panel weight; either a strength alpha (1/length) or a
// relative density alpha-hat (1/length^2) integrating to one.
struct DensityWeight {
  std::vector<double> value;
  bool relative = false;

  void validate(const SurfaceMesh& mesh) const {
    if (static_cast<int>(value.size()) != mesh.panel_count())
      throw std::invalid_argument("DensityWeight: size does not match mesh");
    for (double v : value)
      if (!(v > 0.0)) throw std::invalid_argument("DensityWeight: values must be > 0");
    if (relative) {
      KahanSum s;
      for (int j = 0; j < mesh.panel_count(); ++j) s.add(value[j] * mesh.area[j]);
      if (std::abs(s.value() - 1.0) > 1e-12)
        throw std::invalid_argument(strfmt(
            "DensityWeight: relative density integrates to %.17g, not 1",
            s.value()));
    }
  }

  static DensityWeight constant_strength(const SurfaceMesh& mesh, double alpha0) {
    if (!(alpha0 > 0.0))
      throw std::invalid_argument("constant_strength: alpha0 must be > 0");
    DensityWeight w;
    w.value.assign(mesh.panel_count(), alpha0);
    return w;
  }

  // Constant relative density 1/S.
  static DensityWeight uniform_relative(const SurfaceMesh& mesh) {
    DensityWeight w;
    w.relative = true;
    w.value.assign(mesh.panel_count(), 1.0 / mesh.total_area);
    return w;
  }

  // Rescale arbitrary positive values to a unit-integral relative density.
  static DensityWeight relative_from_values(const SurfaceMesh& mesh,
                                            std::vector<double> v) {
    if (static_cast<int>(v.size()) != mesh.panel_count())
      throw std::invalid_argument("relative_from_values: size mismatch");
    KahanSum s;
    for (int j = 0; j < mesh.panel_count(); ++j) s.add(v[j] * mesh.area[j]);
    double total = s.value();
    if (!(total > 0.0))
      throw std::invalid_argument("relative_from_values: non-positive integral");
    for (double& x : v) x /= total;
    DensityWeight w;
    w.relative = true;
    w.value = std::move(v);
    return w;
  }
};

struct CriticalityReport {
  double lambda_max = 0.0;
  std::vector<double> eigvec;        // positive, density coordinates, max = 1
  double critical_strength = 0.0;    // 1/lambda_max (relative-density weights)
  double interaction_radius = 0.0;   // critical_strength / (4 pi)
  double kappa = 0.0;
  int level = 0;
  int panels = 0;
  int iterations = 0;
  double residual = 0.0;
  bool dense_fallback = false;

  std::string keyed_text() const {
    std::string out;
    out += strfmt("lambda_max = %s\n", fmt_g17(lambda_max).c_str());
    if (critical_strength > 0.0) {
      out += strfmt("critical_strength = %s\n", fmt_g17(critical_strength).c_str());
      out += strfmt("interaction_radius = %s\n", fmt_g17(interaction_radius).c_str());
    }
    out += strfmt("kappa = %s\n", fmt_g17(kappa).c_str());
    out += strfmt("level = %d\n", level);
    out += strfmt("panels = %d\n", panels);
    out += strfmt("iterations = %d\n", iterations);
    out += strfmt("residual = %s\n", fmt_g17(residual).c_str());
    out += strfmt("dense_fallback = %d\n", dense_fallback ? 1 : 0);
    return out;
  }
};

namespace detail {

struct PowerOutcome {
  double value = 0.0;
  Eigen::VectorXd vec;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Power iteration with Rayleigh-quotient stopping on a symmetric positive
// semidefinite operator.
template <class ApplyFn>
PowerOutcome power_iterate(const ApplyFn& apply, Eigen::VectorXd x,
                           double tol = 1e-12, int max_iter = 5000) {
  PowerOutcome out;
  double nx = x.norm();
  if (!(nx > 0.0)) throw std::invalid_argument("power_iterate: zero start vector");
  x /= nx;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = apply(x);
    double lambda = x.dot(y);
    double ny = y.norm();
    out.iterations = it;
    if (ny == 0.0) {  // operator annihilated the vector
      out.value = 0.0;
      out.vec = x;
      out.converged = true;
      return out;
    }
    if (it >= 3 && std::abs(lambda - prev) <= tol * std::abs(lambda)) {
      out.value = lambda;
      out.vec = x;
      out.residual = (y - lambda * x).norm() / std::abs(lambda);
      out.converged = true;
      return out;
    }
    prev = lambda;
    x = y / ny;
  }
  out.value = prev;
  out.vec = x;
  out.converged = false;
  return out;
}

}  // namespace detail

// Largest eigenvalue of the weighted operator w.G via the symmetric form
// B = S K S, S = diag(sqrt(w_i area_i)), K the symmetrized kernel means.
inline CriticalityReport lambda_max(const BsOperator& op, const DensityWeight& w) {
  w.validate(op.mesh);
  int n = op.size();
  Eigen::VectorXd s(n), s_over_area(n);
  for (int i = 0; i < n; ++i) {
    s[i] = std::sqrt(w.value[i] * op.mesh.area[i]);
    s_over_area[i] = s[i] / op.mesh.area[i];
  }
  auto apply_b = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd z = s_over_area.cwiseProduct(x);
    Eigen::VectorXd y = op.apply(z);
    return s.cwiseProduct(y);
  };

  detail::PowerOutcome po =
      detail::power_iterate(apply_b, Eigen::VectorXd::Ones(n));
  bool fallback = false;
  if (!po.converged) {
    // Near-degenerate top of the spectrum: fall back to a dense eigensolve.
    if (!op.dense)
      throw NumericalError("lambda_max: power iteration did not converge");
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        B(i, j) = s[i] * (op.matrix(i, j) / op.mesh.area[j]) * s[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success)
      throw NumericalError("lambda_max: dense eigensolver failed");
    po.value = es.eigenvalues()(n - 1);
    po.vec = es.eigenvectors().col(n - 1);
    po.residual = 0.0;
    fallback = true;
  }

  CriticalityReport rep;
  rep.lambda_max = po.value;
  rep.kappa = op.kappa;
  rep.level = op.mesh.level;
  rep.panels = n;
  rep.iterations = po.iterations;
  rep.residual = po.residual;
  rep.dense_fallback = fallback;
  if (w.relative && po.value > 0.0) {
    rep.critical_strength = 1.0 / po.value;
    rep.interaction_radius = rep.critical_strength / kFourPi;
  }
  // Back to density coordinates v_i = phi_i * sqrt(w_i / area_i), scaled to
  // max entry 1 with positive orientation.
  rep.eigvec.resize(n);
  double extreme = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = po.vec[i] * s_over_area[i];
    rep.eigvec[i] = v;
    if (std::abs(v) > std::abs(extreme)) extreme = v;
  }
  if (extreme != 0.0)
    for (double& v : rep.eigvec) v /= extreme;
  return rep;
}

// Second-largest eigenvalue by deflating the converged top pair.
inline double second_eigenvalue(const BsOperator& op, const DensityWeight& w,
                                const CriticalityReport& top) {
  w.validate(op.mesh);
  int n = op.size();
  Eigen::VectorXd s(n), s_over_area(n);
  for (int i = 0; i < n; ++i) {
    s[i] = std::sqrt(w.value[i] * op.mesh.area[i]);
    s_over_area[i] = s[i] / op.mesh.area[i];
  }
  // Rebuild the symmetric-coordinates top eigenvector from the report.
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) phi[i] = top.eigvec[i] / s_over_area[i];
  phi.normalize();
  // P B P with P the projector off the top eigenvector: its largest
  // eigenvalue is the second one of B (B is positive semidefinite).
  auto apply_deflated = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd xo = x - phi * phi.dot(x);
    Eigen::VectorXd z = s_over_area.cwiseProduct(xo);
    Eigen::VectorXd y = s.cwiseProduct(op.apply(z));
    y -= phi * phi.dot(y);
    return y;
  };
  // Deterministic start: first coordinate of the centroids, orthogonalized.
  Eigen::VectorXd start(n);
  for (int i = 0; i < n; ++i) start[i] = op.mesh.centroid[i].x();
  start -= phi * phi.dot(start);
  if (start.norm() < 1e-12) {
    for (int i = 0; i < n; ++i) start[i] = op.mesh.centroid[i].y();
    start -= phi * phi.dot(start);
  }
  detail::PowerOutcome po = detail::power_iterate(apply_deflated, start);
  if (!po.converged) {
    if (!op.dense)
      throw NumericalError("second_eigenvalue: power iteration did not converge");
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        B(i, j) = s[i] * (op.matrix(i, j) / op.mesh.area[j]) * s[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success)
      throw NumericalError("second_eigenvalue: dense eigensolver failed");
    return es.eigenvalues()(n - 2);
  }
  return po.value;
}

// Critical strength at kappa = 0 for a relative density.
inline CriticalityReport critical_strength(const SurfaceMesh& mesh,
                                           const DensityWeight& rel_density,
                                           AssemblyOptions opt = {}) {
  if (!rel_density.relative)
    throw std::invalid_argument("critical_strength: weight must be a relative density");
  BsOperator op = assemble(mesh, 0.0, opt);
  return lambda_max(op, rel_density);
}

// Row-sum norm sup_x Int k(x, y) dnu(y) over collocation points.
struct GammaInfReport {
  double value = 0.0;
  int argmax_panel = 0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

inline GammaInfReport gamma_inf_norm(const BsOperator& op) {
  int n = op.size();
  Eigen::VectorXd rows = op.apply(Eigen::VectorXd::Ones(n));
  GammaInfReport rep;
  for (int i = 0; i < n; ++i)
    if (rows[i] > rep.value) {
      rep.value = rows[i];
      rep.argmax_panel = i;
    }
  rep.point = op.mesh.centroid[rep.argmax_panel];
  return rep;
}

inline GammaInfReport gamma_inf_norm(const SurfaceMesh& mesh,
                                     AssemblyOptions opt = {}) {
  BsOperator op = assemble(mesh, 0.0, opt);
  return gamma_inf_norm(op);
}

// ---- binary matrix dump --------------------------------------------------
// Layout: magic "DSBSMAT1" (8 bytes), int64 panel count, float64 kappa,
// int32 level, then panel^2 float64 entries in row-major order.

inline void dump_matrix(const BsOperator& op, const std::string& path) {
  if (!op.dense)
    throw std::invalid_argument("dump_matrix: operator is not dense");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot open dump file for writing: " + path);
  const char magic[8] = {'D', 'S', 'B', 'S', 'M', 'A', 'T', '1'};
  std::int64_t n = op.size();
  std::int32_t level = op.mesh.level;
  bool ok = std::fwrite(magic, 1, 8, f) == 8 &&
            std::fwrite(&n, sizeof n, 1, f) == 1 &&
            std::fwrite(&op.kappa, sizeof op.kappa, 1, f) == 1 &&
            std::fwrite(&level, sizeof level, 1, f) == 1;
  for (std::int64_t i = 0; ok && i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      double v = op.matrix(i, j);
      if (std::fwrite(&v, sizeof v, 1, f) != 1) {
        ok = false;
        break;
      }
    }
  std::fclose(f);
  if (!ok) throw ConfigError("failed writing dump file: " + path);
}

inline Eigen::MatrixXd load_matrix_dump(const std::string& path,
                                        double* kappa = nullptr,
                                        int* level = nullptr) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ConfigError("cannot open dump file: " + path);
  char magic[8];
  std::int64_t n = 0;
  double kap = 0.0;
  std::int32_t lev = 0;
  bool ok = std::fread(magic, 1, 8, f) == 8 &&
            std::memcmp(magic, "DSBSMAT1", 8) == 0 &&
            std::fread(&n, sizeof n, 1, f) == 1 && n > 0 && n < (1 << 20) &&
            std::fread(&kap, sizeof kap, 1, f) == 1 &&
            std::fread(&lev, sizeof lev, 1, f) == 1;
  Eigen::MatrixXd m;
  if (ok) {
    m.resize(n, n);
    for (std::int64_t i = 0; ok && i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        double v;
        if (std::fread(&v, sizeof v, 1, f) != 1) {
          ok = false;
          break;
        }
        m(i, j) = v;
      }
  }
  std::fclose(f);
  if (!ok) throw ConfigError("malformed matrix dump: " + path);
  if (kappa) *kappa = kap;
  if (level) *level = lev;
  return m;
}

}  // namespace deltashell
