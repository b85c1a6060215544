// deltashell command-line driver.
//
// Usage: deltashell <command> --config run.cfg [--levels 2,3,4] [--out DIR]
//                   [--format csv|json|both] [--threads N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deltashell/deltashell.hpp"

namespace {

struct Cmd {
  std::string name;
  std::string blurb;
  void (*run)(const deltashell::RunConfig&);
};

const Cmd kCommands[] = {
    {"critical", "largest eigenvalue and critical coupling per mesh level",
     deltashell::cmd_critical},
    {"capacity", "equilibrium charge, capacity, and the criticality cross-check",
     deltashell::cmd_capacity},
    {"deform-scan",
     "critical strength of nearly-spherical shells vs the closed-form series",
     deltashell::cmd_deform_scan},
    {"elongated",
     "thin revolution shells: row-sum certificate for the absence of bound states",
     deltashell::cmd_elongated},
    {"bound-state", "ground-state decay rate and energy for a fixed strength",
     deltashell::cmd_bound_state},
    {"mesh-export", "write the panel meshes for the configured levels",
     deltashell::cmd_mesh_export},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boundary-integral toolkit for singular surface interactions"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> levels_arg, out_arg, format_arg;
  std::optional<int> threads_arg;

  const Cmd* selected = nullptr;
  for (const Cmd& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.blurb);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--levels", levels_arg, "comma-separated mesh levels");
    sub->add_option("--out", out_arg, "output directory");
    sub->add_option("--format", format_arg, "csv, json, or both");
    sub->add_option("--threads", threads_arg, "assembly threads (0 = hardware)");
    sub->callback([&selected, &c] { selected = &c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    deltashell::CliOverrides over;
    over.levels = levels_arg;
    over.out = out_arg;
    over.format = format_arg;
    over.threads = threads_arg;
    deltashell::RunConfig rc = deltashell::load_run_config(config_path, over);
    selected->run(rc);
  } catch (const deltashell::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const deltashell::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
