#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <iostream>
#include <numbers>
#include <string>

#include "kschemo/checks.hpp"
#include "kschemo/config.hpp"
#include "kschemo/error.hpp"
#include "kschemo/mesh.hpp"

using namespace kschemo;

namespace {

int run_subcommand(const std::string& config_path, bool dump) {
  RunConfig config;
  try {
    if (!config_path.empty()) config = parse_config(std::filesystem::path(config_path));
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  if (dump) {
    std::cout << emit_config(config);
    return kExitOk;
  }
  if (config_path.empty()) {
    std::cerr << "config error: run needs --config <path> (or --dump-config)\n";
    return kExitConfigError;
  }
  return run_command(config, std::cout, std::cerr).exit_code;
}

int mesh_subcommand(const std::string& preset, double h, const std::string& out_path) {
  try {
    MeshOptions opts;
    opts.h_target = h;
    const auto result = triangulate(make_domain(parse_domain_preset(preset)), opts);
    const TriMesh& mesh = result.mesh;
    if (!out_path.empty()) save_mesh(mesh, out_path);
    std::cout << "nodes=" << mesh.node_count() << " triangles=" << mesh.triangle_count()
              << " h_max=" << format_double(mesh.max_diameter())
              << " max_angle_deg=" << format_double(mesh.max_angle() * 180.0 / std::numbers::pi)
              << " nonobtuse=" << (result.nonobtuse ? "true" : "false") << '\n';
    return kExitOk;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int check_subcommand(const std::string& suite) {
  bool all = true;
  for (const auto& r : run_check_suite(suite)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ')';
    std::cout << '\n';
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-element chemotaxis simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a simulation from a configuration file");
  std::string config_path;
  bool dump = false;
  run_cmd->add_option("--config", config_path, "configuration file");
  run_cmd->add_flag("--dump-config", dump, "print the canonical configuration and exit");

  auto* mesh_cmd = app.add_subcommand("mesh", "triangulate a preset domain");
  mesh_cmd->set_help_flag("--help", "print this help message and exit");
  std::string preset;
  double h = 0.1;
  std::string out_path;
  mesh_cmd->add_option("--domain", preset, "unit_square or l_shape")->required();
  mesh_cmd->add_option("--h", h, "target element diameter")->required()->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--out", out_path, "write the mesh to this file");

  auto* check_cmd = app.add_subcommand("check", "run a built-in property suite");
  std::string suite;
  check_cmd->add_option("--suite", suite, "suite name")
      ->required()
      ->check(CLI::IsMember(check_suite_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  if (*run_cmd) return run_subcommand(config_path, dump);
  if (*mesh_cmd) return mesh_subcommand(preset, h, out_path);
  return check_subcommand(suite);
}
