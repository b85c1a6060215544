#pragma once

// Structured text configuration: "key = value" lines, '#' comments.
//
// Surface keys:
//   shape         sphere | radial-harmonic | revolution | spheroid
//   radius        sphere radius R / deformation base radius r0 (default 1)
//   epsilon       deformation size (radial-harmonic >= 0, revolution > 0)
//   rho           inline coefficients "n m value; n m value; ..."
//   rho_file      coefficient file, lines "n m value"
//   profile       built-in revolution profile name (bump)
//   profile_table tabulated profile file, lines "v f"
//   axis_a        spheroid semi-axis along the symmetry axis (z)
//   axis_b        spheroid equatorial semi-axis
//
// Run keys:
//   levels        mesh refinement levels, e.g. 2,3,4 (strictly increasing)
//   alpha0        constant strength (default 1)
//   eps_grid      epsilon values for deform-scan / elongated sweeps
//   kappa_grid    kappa values for the bound-state sweep table
//   tol_band      half-width of the critical classification band (default auto)
//   out           output directory (default out)
//   format        csv | json | both (default csv)
//   threads       worker threads, 0 = hardware default
//   dump_matrix   1: dump the finest-level matrix from the critical command

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deltashell/common.hpp"
#include "deltashell/report.hpp"
#include "deltashell/surface.hpp"

namespace deltashell {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": " + s);
  }
}

inline int parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": " + s);
  }
}

}  // namespace detail

// Raw "key = value" file with an allowlist of known keys.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap from_stream(std::istream& in) {
    static const std::vector<std::string> known = {
        "shape",      "radius",     "epsilon",    "rho",        "rho_file",
        "profile",    "profile_table", "axis_a",  "axis_b",     "levels",
        "alpha0",     "eps_grid",   "kappa_grid", "tol_band",   "out",
        "format",     "threads",    "dump_matrix"};
    ConfigMap cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string t = detail::trim(line);
      if (t.empty()) continue;
      std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(strfmt("config: missing '=' on line %d", lineno));
      std::string key = detail::trim(t.substr(0, eq));
      std::string value = detail::trim(t.substr(eq + 1));
      bool ok = false;
      for (const auto& k : known) ok = ok || k == key;
      if (!ok) throw ConfigError("config: unknown key: " + key);
      if (cfg.items_.count(key))
        throw ConfigError("config: duplicate key: " + key);
      cfg.items_[key] = value;
    }
    return cfg;
  }

  static ConfigMap from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return from_stream(in);
  }

  bool has(const std::string& key) const { return items_.count(key) != 0; }
  const std::string& get(const std::string& key) const { return items_.at(key); }
  std::string get_or(const std::string& key, const std::string& def) const {
    auto it = items_.find(key);
    return it == items_.end() ? def : it->second;
  }

 private:
  std::map<std::string, std::string> items_;
};

inline SurfaceSpec surface_from_config(const ConfigMap& cfg) {
  SurfaceSpec spec;
  std::string shape = cfg.get_or("shape", "sphere");
  if (shape == "sphere")
    spec.kind = SurfaceKind::sphere;
  else if (shape == "radial-harmonic")
    spec.kind = SurfaceKind::radial_harmonic;
  else if (shape == "revolution")
    spec.kind = SurfaceKind::revolution;
  else if (shape == "spheroid")
    spec.kind = SurfaceKind::spheroid;
  else
    throw ConfigError("config: unknown shape: " + shape);

  if (cfg.has("radius"))
    spec.radius = detail::parse_double("radius", cfg.get("radius"));
  if (cfg.has("epsilon"))
    spec.epsilon = detail::parse_double("epsilon", cfg.get("epsilon"));
  if (cfg.has("axis_a"))
    spec.axis_a = detail::parse_double("axis_a", cfg.get("axis_a"));
  if (cfg.has("axis_b"))
    spec.axis_b = detail::parse_double("axis_b", cfg.get("axis_b"));

  if (cfg.has("rho") && cfg.has("rho_file"))
    throw ConfigError("config: give either rho or rho_file, not both");
  if (cfg.has("rho")) {
    // Inline triples "n m value" separated by ';'.
    std::string joined;
    for (const std::string& part : detail::split(cfg.get("rho"), ';'))
      if (!part.empty()) joined += part + "\n";
    std::istringstream in(joined);
    spec.rho = read_harmonic_coeffs(in);
  } else if (cfg.has("rho_file")) {
    spec.rho = read_harmonic_coeffs_file(cfg.get("rho_file"));
  }

  if (spec.kind == SurfaceKind::revolution) {
    if (cfg.has("profile_table"))
      spec.profile = table_profile(cfg.get("profile_table"));
    else if (cfg.get_or("profile", "bump") == "bump")
      spec.profile = bump_profile();
    else
      throw ConfigError("config: unknown profile: " + cfg.get("profile"));
  }
  spec.validate();
  return spec;
}

struct RunConfig {
  SurfaceSpec spec;
  std::string shape_text = "sphere";  // canonical surface keys for hashing
  std::vector<int> levels = {2, 3, 4};
  double alpha0 = 1.0;
  std::vector<double> eps_grid;
  std::vector<double> kappa_grid;
  double tol_band = -1.0;  // < 0: automatic band from convergence data
  std::string out = "out";
  OutputFormat format = OutputFormat::csv;
  int threads = 0;
  bool dump_matrix_flag = false;

  AssemblyOptions assembly() const {
    AssemblyOptions a;
    a.threads = threads;
    return a;
  }

  void require_levels(std::size_t n_min) const {
    if (levels.size() < n_min)
      throw ConfigError(strfmt(
          "config: this command needs at least %zu mesh levels", n_min));
  }

  // Digest of everything that determines file contents; deliberately
  // excludes the thread count and output location.
  std::string config_hash() const {
    std::string canon = "surface=" + shape_text + "\n";
    canon += "levels=";
    for (std::size_t i = 0; i < levels.size(); ++i)
      canon += strfmt(i ? ",%d" : "%d", levels[i]);
    canon += "\n";
    canon += strfmt("alpha0=%s\n", fmt_g17(alpha0).c_str());
    canon += "eps_grid=";
    for (std::size_t i = 0; i < eps_grid.size(); ++i)
      canon += (i ? "," : "") + fmt_g17(eps_grid[i]);
    canon += "\nkappa_grid=";
    for (std::size_t i = 0; i < kappa_grid.size(); ++i)
      canon += (i ? "," : "") + fmt_g17(kappa_grid[i]);
    canon += strfmt("\ntol_band=%s\n", fmt_g17(tol_band).c_str());
    canon += strfmt("dump_matrix=%d\n", dump_matrix_flag ? 1 : 0);
    return hex64(fnv1a(canon));
  }

  std::vector<std::pair<std::string, std::string>> meta(
      const std::string& command) const {
    std::vector<std::pair<std::string, std::string>> m;
    m.emplace_back("deltashell", command);
    m.emplace_back("config_hash", config_hash());
    std::string lv;
    for (std::size_t i = 0; i < levels.size(); ++i)
      lv += strfmt(i ? ",%d" : "%d", levels[i]);
    m.emplace_back("levels", lv);
    m.emplace_back("surface", spec.summary());
    return m;
  }
};

inline std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  for (const std::string& part : detail::split(s, ','))
    if (!part.empty()) out.push_back(detail::parse_int("levels", part));
  if (out.empty()) throw ConfigError("config: empty levels list");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0) throw ConfigError("config: levels must be >= 0");
    if (i > 0 && out[i] <= out[i - 1])
      throw ConfigError("config: levels must be strictly increasing");
  }
  return out;
}

inline std::vector<double> parse_grid(const std::string& key, const std::string& s,
                                      bool require_positive) {
  std::vector<double> out;
  for (const std::string& part : detail::split(s, ','))
    if (!part.empty()) out.push_back(detail::parse_double(key, part));
  for (double v : out)
    if (require_positive && !(v > 0.0))
      throw ConfigError("config: " + key + " values must be > 0");
  return out;
}

// Effective run configuration: file values, then command-line overrides.
struct CliOverrides {
  std::optional<std::string> levels;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;
};

// Full-precision surface description for hashing.  The human-readable
// summary() rounds for display and skips the harmonic coefficients; the
// hash must distinguish every surface that computes different numbers.
inline std::string canonical_surface_text(const SurfaceSpec& spec) {
  std::string out;
  switch (spec.kind) {
    case SurfaceKind::sphere:
      out = strfmt("sphere R=%s", fmt_g17(spec.radius).c_str());
      break;
    case SurfaceKind::radial_harmonic: {
      out = strfmt("radial-harmonic r0=%s eps=%s", fmt_g17(spec.radius).c_str(),
                   fmt_g17(spec.epsilon).c_str());
      for (int n = 0; n <= spec.rho.n_max(); ++n)
        for (int m = -n; m <= n; ++m)
          if (spec.rho.coeff(n, m) != 0.0)
            out += strfmt(" %d:%d:%s", n, m, fmt_g17(spec.rho.coeff(n, m)).c_str());
      break;
    }
    case SurfaceKind::revolution:
      out = strfmt("revolution profile=%s eps=%s", spec.profile.name.c_str(),
                   fmt_g17(spec.epsilon).c_str());
      break;
    case SurfaceKind::spheroid:
      out = strfmt("spheroid a=%s b=%s", fmt_g17(spec.axis_a).c_str(),
                   fmt_g17(spec.axis_b).c_str());
      break;
  }
  return out;
}

inline RunConfig load_run_config(const std::string& config_path,
                                 const CliOverrides& over) {
  ConfigMap cfg =
      config_path.empty() ? ConfigMap() : ConfigMap::from_file(config_path);
  RunConfig rc;
  rc.spec = surface_from_config(cfg);
  rc.shape_text = canonical_surface_text(rc.spec);
  if (cfg.has("levels")) rc.levels = parse_levels(cfg.get("levels"));
  if (cfg.has("alpha0")) {
    rc.alpha0 = detail::parse_double("alpha0", cfg.get("alpha0"));
    if (!(rc.alpha0 > 0.0)) throw ConfigError("config: alpha0 must be > 0");
  }
  if (cfg.has("eps_grid")) rc.eps_grid = parse_grid("eps_grid", cfg.get("eps_grid"), true);
  if (cfg.has("kappa_grid"))
    rc.kappa_grid = parse_grid("kappa_grid", cfg.get("kappa_grid"), true);
  if (cfg.has("tol_band")) {
    rc.tol_band = detail::parse_double("tol_band", cfg.get("tol_band"));
    if (!(rc.tol_band > 0.0)) throw ConfigError("config: tol_band must be > 0");
  }
  rc.out = cfg.get_or("out", "out");
  rc.format = parse_format(cfg.get_or("format", "csv"));
  if (cfg.has("threads")) rc.threads = detail::parse_int("threads", cfg.get("threads"));
  if (cfg.has("dump_matrix"))
    rc.dump_matrix_flag = detail::parse_int("dump_matrix", cfg.get("dump_matrix")) != 0;

  if (over.levels) rc.levels = parse_levels(*over.levels);
  if (over.out) rc.out = *over.out;
  if (over.format) rc.format = parse_format(*over.format);
  if (over.threads) rc.threads = *over.threads;
  if (rc.threads < 0) throw ConfigError("config: threads must be >= 0");
  return rc;
}

}  // namespace deltashell
