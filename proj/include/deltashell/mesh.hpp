#pragma once

// Triangulated surfaces: construction from a SurfaceSpec, dilation, and a
// plain-text exchange format.  Meshes are immutable value types once built.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "deltashell/common.hpp"
#include "deltashell/surface.hpp"

namespace deltashell {

struct SurfaceMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Eigen::Vector3d> centroid;  // per panel
  std::vector<double> area;               // per panel
  std::vector<Eigen::Vector3d> normal;    // per panel, outward unit
  double total_area = 0.0;
  int level = 0;
  std::string provenance;

  int panel_count() const { return static_cast<int>(triangles.size()); }

  // Longest bounding-box diagonal; a cheap stand-in for the diameter used
  // to scale root brackets.
  double extent() const {
    Eigen::Vector3d lo = vertices.front(), hi = vertices.front();
    for (const auto& v : vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
  }
};

namespace detail {

// Every undirected edge must appear in exactly two triangles, once per
// direction; anything else means the surface is not closed and orientable.
inline void check_closed(const SurfaceMesh& mesh) {
  std::unordered_map<std::uint64_t, int> seen;  // directed edge -> count
  auto key = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a == b) throw NumericalError("mesh: degenerate triangle edge");
      ++seen[key(a, b)];
    }
  for (const auto& [k, count] : seen) {
    int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffu);
    auto rev = seen.find(key(b, a));
    if (count != 1 || rev == seen.end() || rev->second != 1)
      throw NumericalError("mesh: not a closed orientable surface");
  }
}

// Fills the per-panel data and orients the mesh outward (positive enclosed
// volume); throws on degenerate panels.
inline void finalize_panels(SurfaceMesh& mesh) {
  int n = mesh.panel_count();
  mesh.centroid.resize(n);
  mesh.area.resize(n);
  mesh.normal.resize(n);
  double scale = mesh.extent();
  // Signed volume decides global orientation in one deterministic pass.
  double volume6 = 0.0;
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]],
                          &c = mesh.vertices[t[2]];
    volume6 += a.dot(b.cross(c));
  }
  if (volume6 < 0.0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);

  KahanSum total;
  for (int i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[i];
    const Eigen::Vector3d &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]],
                          &c = mesh.vertices[t[2]];
    Eigen::Vector3d av = 0.5 * (b - a).cross(c - a);
    double ar = av.norm();
    if (!(ar > 1e-14 * scale * scale))
      throw NumericalError(strfmt("mesh: degenerate panel %d", i));
    mesh.centroid[i] = (a + b + c) / 3.0;
    mesh.area[i] = ar;
    mesh.normal[i] = av / ar;
    total.add(ar);
  }
  mesh.total_area = total.value();
  check_closed(mesh);
}

// Icosahedron with unit-sphere vertices, wound counterclockwise seen from
// outside.
inline void base_icosahedron(std::vector<Eigen::Vector3d>& verts,
                             std::vector<std::array<int, 3>>& tris) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {
      {-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  verts.clear();
  for (const auto& p : raw)
    verts.push_back(Eigen::Vector3d(p[0], p[1], p[2]).normalized());
  tris = {{{0, 11, 5}}, {{0, 5, 1}},  {{0, 1, 7}},   {{0, 7, 10}}, {{0, 10, 11}},
          {{1, 5, 9}},  {{5, 11, 4}}, {{11, 10, 2}}, {{10, 7, 6}}, {{7, 1, 8}},
          {{3, 9, 4}},  {{3, 4, 2}},  {{3, 2, 6}},   {{3, 6, 8}},  {{3, 8, 9}},
          {{4, 9, 5}},  {{2, 4, 11}}, {{6, 2, 10}},  {{8, 6, 7}},  {{9, 8, 1}}};
}

inline SurfaceMesh build_radial_mesh(const SurfaceSpec& spec, int level) {
  std::vector<Eigen::Vector3d> dirs;
  std::vector<std::array<int, 3>> tris;
  base_icosahedron(dirs, tris);

  for (int l = 0; l < level; ++l) {
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      std::uint64_t k =
          (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
      auto it = midpoint.find(k);
      if (it != midpoint.end()) return it->second;
      Eigen::Vector3d d = (dirs[a] + dirs[b]).normalized();
      int idx = static_cast<int>(dirs.size());
      dirs.push_back(d);
      midpoint.emplace(k, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({t[1], m12, m01});
      next.push_back({t[2], m20, m12});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }

  // Plain midpoint subdivision leaves the panel areas oscillating by ~30%
  // between neighbours, which shows up directly as noise in collocation
  // densities.  A fixed number of Lloyd smoothing passes on the unit sphere
  // equalizes the local areas; working in direction space keeps the grid
  // identical for every surface sharing the same level, so comparisons
  // across a deformation family stay noise-cancelling.
  constexpr int kLloydIters = 30;
  std::vector<Eigen::Vector3d> acc(dirs.size());
  std::vector<double> wsum(dirs.size());
  for (int it = 0; it < kLloydIters; ++it) {
    std::fill(acc.begin(), acc.end(), Eigen::Vector3d::Zero());
    std::fill(wsum.begin(), wsum.end(), 0.0);
    for (const auto& t : tris) {
      const Eigen::Vector3d &a = dirs[t[0]], &b = dirs[t[1]], &c = dirs[t[2]];
      double area = 0.5 * (b - a).cross(c - a).norm();
      Eigen::Vector3d cen = (a + b + c) * (area / 3.0);
      for (int v : t) {
        acc[v] += cen;
        wsum[v] += area;
      }
    }
    for (std::size_t i = 0; i < dirs.size(); ++i)
      dirs[i] = (acc[i] / wsum[i]).normalized();
  }

  // Project a direction onto the surface along the ray from the origin.
  auto on_surface = [&spec](const Eigen::Vector3d& d) {
    double polar = std::acos(std::clamp(d.z(), -1.0, 1.0));
    double azimuth = std::atan2(d.y(), d.x());
    if (azimuth < 0.0) azimuth += 2.0 * 3.14159265358979323846;
    return radial_map(spec, polar, azimuth).r * d;
  };

  SurfaceMesh mesh;
  mesh.vertices.reserve(dirs.size());
  for (const auto& d : dirs) mesh.vertices.push_back(on_surface(d));
  mesh.triangles = std::move(tris);
  mesh.level = level;
  mesh.provenance = spec.summary() + strfmt(" level=%d", level);
  finalize_panels(mesh);
  return mesh;
}

inline SurfaceMesh build_revolution_mesh(const SurfaceSpec& spec, int level) {
  const double pi = 3.14159265358979323846;
  int nu = 8 << level;       // azimuthal columns
  int nt = (4 << level) + 1; // latitude stations counting both poles
  double eps = spec.epsilon;

  SurfaceMesh mesh;
  // v = -cos(t) grades the rings toward the caps where f' blows up.
  auto ring_v = [&](int k) { return -std::cos(pi * k / (nt - 1)); };
  mesh.vertices.push_back(Eigen::Vector3d(0, 0, -1.0 / eps));  // bottom pole
  std::vector<int> ring_start(nt, -1);
  for (int k = 1; k + 1 < nt; ++k) {
    double v = ring_v(k);
    double w = eps * spec.profile.f(v);
    ring_start[k] = static_cast<int>(mesh.vertices.size());
    for (int j = 0; j < nu; ++j) {
      double u = 2.0 * pi * j / nu;
      mesh.vertices.push_back(
          Eigen::Vector3d(w * std::cos(u), w * std::sin(u), v / eps));
    }
  }
  int top = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(Eigen::Vector3d(0, 0, 1.0 / eps));  // top pole

  auto at = [&](int k, int j) { return ring_start[k] + (j % nu); };
  for (int j = 0; j < nu; ++j)  // bottom fan
    mesh.triangles.push_back({0, at(1, j + 1), at(1, j)});
  for (int k = 1; k + 2 < nt; ++k)
    for (int j = 0; j < nu; ++j) {
      mesh.triangles.push_back({at(k, j), at(k, j + 1), at(k + 1, j)});
      mesh.triangles.push_back({at(k, j + 1), at(k + 1, j + 1), at(k + 1, j)});
    }
  for (int j = 0; j < nu; ++j)  // top fan
    mesh.triangles.push_back({top, at(nt - 2, j), at(nt - 2, j + 1)});

  mesh.level = level;
  mesh.provenance = spec.summary() + strfmt(" level=%d", level);
  finalize_panels(mesh);
  return mesh;
}

}  // namespace detail

// Triangulate a surface; panel count grows x4 per level.
inline SurfaceMesh build_mesh(const SurfaceSpec& spec, int level) {
  if (level < 0) throw std::invalid_argument("build_mesh: level must be >= 0");
  spec.validate();
  if (spec.kind == SurfaceKind::revolution)
    return detail::build_revolution_mesh(spec, level);
  return detail::build_radial_mesh(spec, level);
}

// Uniform scaling: vertices and centroids by s, areas by s^2, normals kept.
inline SurfaceMesh dilate(const SurfaceMesh& mesh, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("dilate: scale must be > 0");
  SurfaceMesh out = mesh;
  for (auto& v : out.vertices) v *= s;
  for (auto& c : out.centroid) c *= s;
  double s2 = s * s;
  KahanSum total;
  for (auto& a : out.area) {
    a *= s2;
    total.add(a);
  }
  out.total_area = total.value();
  out.provenance = mesh.provenance + strfmt(" dilated=%g", s);
  return out;
}

// ---- text exchange format ----------------------------------------------
//
//   # deltashell mesh
//   # provenance: <free text>
//   # level: <int>
//   counts <n_vertices> <n_triangles>
//   v <x> <y> <z>          (one line per vertex, %.17g)
//   f <i> <j> <k>          (zero-based vertex indices)

inline void write_mesh(const SurfaceMesh& mesh, std::ostream& out) {
  out << "# deltashell mesh\n";
  out << "# provenance: " << mesh.provenance << "\n";
  out << "# level: " << mesh.level << "\n";
  out << "counts " << mesh.vertices.size() << " " << mesh.triangles.size()
      << "\n";
  for (const auto& v : mesh.vertices)
    out << "v " << fmt_g17(v.x()) << " " << fmt_g17(v.y()) << " "
        << fmt_g17(v.z()) << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

inline void write_mesh_file(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open mesh file for writing: " + path);
  write_mesh(mesh, out);
}

inline SurfaceMesh read_mesh(std::istream& in) {
  SurfaceMesh mesh;
  std::string line;
  long nv = -1, nt = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string prov = "# provenance: ", lev = "# level: ";
      if (line.rfind(prov, 0) == 0) mesh.provenance = line.substr(prov.size());
      if (line.rfind(lev, 0) == 0) mesh.level = std::stoi(line.substr(lev.size()));
      continue;
    }
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "counts") {
      if (!(ls >> nv >> nt) || nv < 4 || nt < 4)
        throw ConfigError("mesh file: bad counts line");
    } else if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw ConfigError(strfmt("mesh file: bad vertex line %d", lineno));
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      int a, b, c;
      if (!(ls >> a >> b >> c))
        throw ConfigError(strfmt("mesh file: bad face line %d", lineno));
      long n = static_cast<long>(mesh.vertices.size());
      if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n)
        throw ConfigError(strfmt("mesh file: face index out of range, line %d", lineno));
      mesh.triangles.push_back({a, b, c});
    } else {
      throw ConfigError(strfmt("mesh file: unknown record '%s' on line %d",
                               tag.c_str(), lineno));
    }
  }
  if (nv != static_cast<long>(mesh.vertices.size()) ||
      nt != static_cast<long>(mesh.triangles.size()))
    throw ConfigError("mesh file: counts do not match records");
  detail::finalize_panels(mesh);
  return mesh;
}

inline SurfaceMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  return read_mesh(in);
}

}  // namespace deltashell
