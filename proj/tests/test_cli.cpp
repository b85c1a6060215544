#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deltashell/deltashell.hpp"
#include "oracles.hpp"

using namespace deltashell;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("ds_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd =
      std::string(DELTASHELL_BIN) + " " + args + " > " + log.string() + " 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

// Value of a "key = value" line in a keyed-text summary (not the '#' meta).
std::string summary_value(const std::string& content, const std::string& key) {
  std::string needle = key + " = ";
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
  FAIL("summary key not found: " << key);
  return "";
}

std::string meta_value(const std::string& content, const std::string& key) {
  std::string needle = "# " + key + " = ";
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
  FAIL("meta key not found: " << key);
  return "";
}

int line_count(const std::string& content) {
  int n = 0;
  for (char c : content)
    if (c == '\n') ++n;
  return n;
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// nth data line of a CSV artifact (after '#' meta and the column header).
std::string csv_row(const std::string& content, int idx) {
  std::istringstream lines(content);
  std::string line;
  int data = -1;  // header first
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] == '#') continue;
    if (data == idx) return line;
    ++data;
  }
  FAIL("csv row out of range");
  return "";
}

}  // namespace

TEST_CASE("critical command: artifacts, reproducibility, formats", "[cli]") {
  TempDir tmp("critical");
  fs::path cfg = tmp / "run.cfg";
  fs::path outa = tmp / "a";
  spit(cfg, "shape = sphere\nradius = 1\nlevels = 0,1,2\nout = " +
                outa.string() + "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("critical --config " + cfg.string(), log) == 0);

  std::string csv = slurp(outa / "critical_levels.csv");
  std::string summary = slurp(outa / "critical_summary.txt");
  REQUIRE(!fs::exists(outa / "critical_levels.json"));  // csv is the default

  // Metadata header: command, 16-hex config digest, levels, surface.
  REQUIRE(meta_value(csv, "deltashell") == "critical");
  std::string hash = meta_value(csv, "config_hash");
  REQUIRE(std::regex_match(hash, std::regex("[0-9a-f]{16}")));
  REQUIRE(meta_value(csv, "levels") == "0,1,2");
  REQUIRE(meta_value(summary, "config_hash") == hash);
  REQUIRE(csv_row(csv, -1) ==
          "level,panels,lambda_max,critical_strength,interaction_radius,"
          "iterations,residual");
  REQUIRE(line_count(csv) == 4 + 1 + 3);  // meta, header, one row per level

  // Convergence toward the exact sphere values.  The reported lambda_max is
  // taken with the uniform density normalized to unit integral, so its limit
  // is 1/(4*pi), and the critical strength (its reciprocal) tends to 4*pi.
  double quarter = 1.0 / (4.0 * oracle::kPi);
  REQUIRE(std::abs(std::stod(summary_value(summary, "lambda_max_extrapolated")) -
                   quarter) < 2e-3 * quarter);
  REQUIRE(std::abs(std::stod(summary_value(summary, "critical_strength_extrapolated")) -
                   4.0 * oracle::kPi) < 5e-3 * 4.0 * oracle::kPi);
  REQUIRE(std::abs(std::stod(summary_value(summary, "interaction_radius_extrapolated")) -
                   1.0) < 5e-3);

  // Same computation on two threads is byte-identical (and the hash ignores
  // the thread count).
  fs::path outb = tmp / "b";
  REQUIRE(run_cli("critical --config " + cfg.string() + " --threads 2 --out " +
                      outb.string(),
                  log) == 0);
  REQUIRE(slurp(outb / "critical_levels.csv") == csv);
  REQUIRE(slurp(outb / "critical_summary.txt") == summary);

  // both: JSON mirrors carry the same metadata and stringified cells.
  fs::path outc = tmp / "c";
  REQUIRE(run_cli("critical --config " + cfg.string() + " --format both --out " +
                      outc.string(),
                  log) == 0);
  REQUIRE(slurp(outc / "critical_levels.csv") == csv);
  nlohmann::json j = nlohmann::json::parse(slurp(outc / "critical_levels.json"));
  REQUIRE(j["meta"]["config_hash"] == hash);
  REQUIRE(j["columns"].size() == 7);
  REQUIRE(j["rows"].size() == 3);
  REQUIRE(j["rows"][0][2] == csv_fields(csv_row(csv, 0))[2]);  // lambda cell
  nlohmann::json js = nlohmann::json::parse(slurp(outc / "critical_summary.json"));
  REQUIRE(js["values"]["lambda_max_extrapolated"] ==
          summary_value(summary, "lambda_max_extrapolated"));

  // json only: no CSV artifacts.
  fs::path outd = tmp / "d";
  REQUIRE(run_cli("critical --config " + cfg.string() + " --format json --out " +
                      outd.string(),
                  log) == 0);
  REQUIRE(fs::exists(outd / "critical_levels.json"));
  REQUIRE(!fs::exists(outd / "critical_levels.csv"));
}

TEST_CASE("configuration and usage failures exit with code 2", "[cli]") {
  TempDir tmp("usage");
  fs::path log = tmp / "log.txt";
  auto cfg_with = [&](const std::string& name, const std::string& text) {
    fs::path p = tmp / name;
    spit(p, text);
    return p.string();
  };
  std::string sphere = cfg_with("sphere.cfg", "shape = sphere\nlevels = 0,1,2\n");

  struct Case {
    const char* what;
    std::string args;
  };
  const Case cases[] = {
      {"unknown key", "critical --config " +
                          cfg_with("k.cfg", "shape = sphere\nwibble = 3\n")},
      {"bad shape", "critical --config " + cfg_with("s.cfg", "shape = torus\n")},
      {"duplicate key",
       "critical --config " + cfg_with("d.cfg", "radius = 1\nradius = 2\n")},
      {"missing config file",
       "critical --config " + (tmp / "no_such.cfg").string()},
      {"levels not increasing",
       "critical --config " + cfg_with("l.cfg", "shape = sphere\nlevels = 3,3\n")},
      {"alpha0 not positive",
       "critical --config " + cfg_with("a.cfg", "shape = sphere\nalpha0 = 0\n")},
      {"rho and rho_file together",
       "critical --config " +
           cfg_with("r.cfg",
                    "shape = radial-harmonic\nepsilon = 0.1\nrho = 2 0 1\n"
                    "rho_file = none.txt\n")},
      {"deform-scan needs a harmonic family", "deform-scan --config " + sphere},
      {"elongated needs a revolution family", "elongated --config " + sphere},
      {"levels override not increasing",
       "critical --config " + sphere + " --levels 2,2"},
      {"levels override not numeric",
       "critical --config " + sphere + " --levels abc"},
      {"too few levels for extrapolation",
       "critical --config " + sphere + " --levels 0,1"},
      {"bad format", "critical --config " + sphere + " --format xml"},
      {"negative threads", "critical --config " + sphere + " --threads -2"},
      {"kappa grid not positive",
       "bound-state --config " +
           cfg_with("kg.cfg", "shape = sphere\nkappa_grid = 0,1\n")},
      {"tol_band not positive",
       "bound-state --config " +
           cfg_with("tb.cfg", "shape = sphere\ntol_band = -1\n")},
      {"missing required option", "critical"},
      {"no subcommand", ""},
      {"unknown subcommand", "frobnicate --config " + sphere},
  };
  for (const Case& c : cases) {
    INFO(c.what << ": " << c.args);
    REQUIRE(run_cli(c.args, log) == 2);
  }
}

TEST_CASE("degenerate geometry fails numerically with exit code 3", "[cli]") {
  TempDir tmp("numfail");
  // Tabulated profile pinched to ~1e-14 through the middle: every waist
  // panel collapses below the degeneracy threshold of the mesh builder.
  auto shape = [](double v) {
    double a = std::abs(v);
    double bulge = a >= 0.4 ? (1.0 - v * v) * (a - 0.4) * (a - 0.4) : 0.0;
    return 1e-14 + bulge;
  };
  std::string raw;
  for (int i = 0; i <= 200; ++i) {
    double v = -1.0 + i / 100.0;
    raw += strfmt("%.17g %.17g\n", v, shape(v));
  }
  fs::path table = tmp / "pinched.txt";
  spit(table, raw);
  // Normalize exactly the way the library will integrate it.
  double norm = 2.0 * oracle::kPi * table_profile(table.string()).integral;
  std::string scaled;
  for (int i = 0; i <= 200; ++i) {
    double v = -1.0 + i / 100.0;
    scaled += strfmt("%.17g %.17g\n", v, shape(v) / norm);
  }
  spit(table, scaled);
  {
    SurfaceSpec spec;
    spec.kind = SurfaceKind::revolution;
    spec.epsilon = 1.0;
    spec.profile = table_profile(table.string());
    REQUIRE_NOTHROW(spec.validate());  // passes the profile checks...
    REQUIRE_THROWS_AS(build_mesh(spec, 1), NumericalError);  // ...degenerate
  }
  fs::path cfg = tmp / "run.cfg";
  spit(cfg, "shape = revolution\nepsilon = 1\nprofile_table = " +
                table.string() + "\nlevels = 1\nout = " + (tmp / "out").string() +
                "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("mesh-export --config " + cfg.string(), log) == 3);
  REQUIRE(slurp(log).find("numerical failure") != std::string::npos);
}

TEST_CASE("mesh export round-trips through the text format", "[cli]") {
  TempDir tmp("meshexp");
  fs::path cfg = tmp / "run.cfg";
  fs::path out = tmp / "out";
  spit(cfg, "shape = sphere\nlevels = 1,2\nout = " + out.string() + "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("mesh-export --config " + cfg.string(), log) == 0);

  std::string summary = slurp(out / "mesh_export_summary.txt");
  REQUIRE(summary_value(summary, "mesh_L1_panels") == "80");
  REQUIRE(summary_value(summary, "mesh_L2_panels") == "320");
  REQUIRE(std::abs(std::stod(summary_value(summary, "area_true")) -
                   4.0 * oracle::kPi) < 1e-12);

  SurfaceSpec spec;
  spec.kind = SurfaceKind::sphere;
  SurfaceMesh direct = build_mesh(spec, 1);
  SurfaceMesh loaded = read_mesh_file((out / "mesh_L1.txt").string());
  REQUIRE(loaded.panel_count() == direct.panel_count());
  REQUIRE(loaded.level == direct.level);
  REQUIRE(loaded.total_area == direct.total_area);
  for (int j = 0; j < direct.panel_count(); ++j)
    REQUIRE((loaded.centroid[j] - direct.centroid[j]).norm() == 0.0);
}

TEST_CASE("matrix dump from the critical command", "[cli]") {
  TempDir tmp("dump");
  fs::path cfg = tmp / "run.cfg";
  fs::path out = tmp / "out";
  spit(cfg, "shape = sphere\nlevels = 0,1,2\ndump_matrix = 1\nout = " +
                out.string() + "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("critical --config " + cfg.string(), log) == 0);

  double kappa = -1.0;
  int level = -1;
  Eigen::MatrixXd m =
      load_matrix_dump((out / "bs_matrix_L2.bin").string(), &kappa, &level);
  REQUIRE(kappa == 0.0);
  REQUIRE(level == 2);
  SurfaceSpec spec;
  spec.kind = SurfaceKind::sphere;
  BsOperator op = assemble(build_mesh(spec, 2), 0.0);
  REQUIRE(m.rows() == op.matrix.rows());
  REQUIRE(std::memcmp(m.data(), op.matrix.data(), sizeof(double) * m.size()) ==
          0);
}

TEST_CASE("bound-state pipeline with the scalar oracle column", "[cli]") {
  TempDir tmp("bound");
  fs::path cfg = tmp / "run.cfg";
  fs::path out = tmp / "out";
  spit(cfg, "shape = sphere\nalpha0 = 1.5\nlevels = 0,1,2\n"
            "kappa_grid = 0.2,0.6,1.2\nout = " +
                out.string() + "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("bound-state --config " + cfg.string(), log) == 0);

  std::string csv = slurp(out / "bound_state_levels.csv");
  REQUIRE(csv_row(csv, -1) ==
          "level,panels,lambda_at_zero,kappa_star,energy,evaluations,"
          "kappa_oracle");
  std::string summary = slurp(out / "bound_state_summary.txt");
  REQUIRE(summary_value(summary, "classification") == "supercritical");

  double truth = oracle::swave_kappa(1.5, 1.0);
  double kx = std::stod(summary_value(summary, "kappa_star_extrapolated"));
  REQUIRE(std::abs(kx - truth) < 0.02 * truth);
  REQUIRE(std::stod(summary_value(summary, "kappa_rel_deviation")) < 0.02);
  REQUIRE(std::abs(std::stod(summary_value(summary, "kappa_oracle")) - truth) <
          1e-9);
  REQUIRE(std::abs(std::stod(summary_value(summary, "energy_extrapolated")) +
                   kx * kx) < 1e-15);

  std::string sweep = slurp(out / "kappa_sweep.csv");
  REQUIRE(csv_row(sweep, -1) == "kappa,lambda_max");
  double prev = 1e300;
  for (int i = 0; i < 3; ++i) {
    double lam = std::stod(csv_fields(csv_row(sweep, i))[1]);
    REQUIRE(lam < prev);
    prev = lam;
  }
}

TEST_CASE("deformation scan matches the closed-form series", "[cli]") {
  TempDir tmp("deform");
  fs::path out = tmp / "out";
  fs::path cfg = tmp / "run.cfg";
  spit(cfg, "shape = radial-harmonic\nradius = 1\nepsilon = 0.1\n"
            "rho = 2 0 1\neps_grid = 0.2,0.3\nlevels = 0,1,2\nout = " +
                out.string() + "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("deform-scan --config " + cfg.string(), log) == 0);

  std::string csv = slurp(out / "deform_scan.csv");
  REQUIRE(line_count(csv) == 4 + 1 + 2);
  std::string summary = slurp(out / "deform_summary.txt");
  REQUIRE(std::abs(std::stod(summary_value(summary, "series_product2")) -
                   (-1.0 / (16.0 * oracle::kPi))) < 1e-12);
  // The measured quadratic deficit limit lands near the series value even
  // on these coarse levels.
  double limit = std::stod(summary_value(summary, "deficit_eps2_limit"));
  REQUIRE(limit > 0.005);
  REQUIRE(limit < 0.05);
  // Per-epsilon rows: the predicted strength column is the truncated series.
  auto row0 = csv_fields(csv_row(csv, 0));
  REQUIRE(std::stod(row0[0]) == 0.2);
  REQUIRE(std::abs(std::stod(row0[4]) -
                   (1.0 + 0.04 * (-9.0 / (16.0 * oracle::kPi)))) < 1e-12);
  for (int i = 0; i < 2; ++i)
    REQUIRE(std::stod(csv_fields(csv_row(csv, i))[3]) < 1.0);  // product < 1

  // Coefficients from a file behave exactly like inline ones (duplicate
  // mode lines accumulate), and the artifacts come out byte-identical.
  fs::path coeffs = tmp / "rho.txt";
  spit(coeffs, "2 0 0.6\n2 0 0.4\n");
  fs::path cfg2 = tmp / "run2.cfg";
  fs::path out2 = tmp / "out2";
  spit(cfg2, "shape = radial-harmonic\nradius = 1\nepsilon = 0.1\n"
             "rho_file = " +
                 coeffs.string() + "\neps_grid = 0.2,0.3\nlevels = 0,1,2\nout = " +
                 out2.string() + "\n");
  REQUIRE(run_cli("deform-scan --config " + cfg2.string(), log) == 0);
  REQUIRE(slurp(out2 / "deform_scan.csv") == csv);
  REQUIRE(slurp(out2 / "deform_summary.txt") == summary);

  // Different coefficients must change the configuration digest.
  CliOverrides none;
  fs::path cfg3 = tmp / "run3.cfg";
  spit(cfg3, "shape = radial-harmonic\nradius = 1\nepsilon = 0.1\n"
             "rho = 2 0 0.5\neps_grid = 0.2,0.3\nlevels = 0,1,2\n");
  REQUIRE(load_run_config(cfg.string(), none).config_hash() !=
          load_run_config(cfg3.string(), none).config_hash());
}

TEST_CASE("capacity pipeline with the sigma table", "[cli]") {
  TempDir tmp("capacity");
  fs::path cfg = tmp / "run.cfg";
  fs::path out = tmp / "out";
  spit(cfg, "shape = sphere\nlevels = 0,1,2\nformat = both\nout = " +
                out.string() + "\n");
  fs::path log = tmp / "log.txt";
  REQUIRE(run_cli("capacity --config " + cfg.string(), log) == 0);

  std::string csv = slurp(out / "capacity_levels.csv");
  REQUIRE(line_count(csv) == 4 + 1 + 3);
  std::string summary = slurp(out / "capacity_summary.txt");
  REQUIRE(std::abs(std::stod(summary_value(summary, "capacity_extrapolated")) -
                   1.0) < 0.01);
  REQUIRE(std::abs(std::stod(summary_value(summary, "lambda_sigma_weight")) -
                   1.0) < 1e-10);
  REQUIRE(std::stod(summary_value(summary, "gap")) > 0.0);

  std::string sigma = slurp(out / "sigma_L2.csv");
  REQUIRE(csv_row(sigma, -1) == "panel,x,y,z,area,sigma");
  REQUIRE(line_count(sigma) == 4 + 1 + 320);
  nlohmann::json j = nlohmann::json::parse(slurp(out / "sigma_L2.json"));
  REQUIRE(j["rows"].size() == 320);
}
