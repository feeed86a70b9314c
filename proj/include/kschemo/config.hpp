#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kschemo/mesh.hpp"
#include "kschemo/reactions.hpp"
#include "kschemo/state.hpp"
#include "kschemo/stepper.hpp"

namespace kschemo {

/// Initial data for one field.
///   constant <c>
///   gaussian <x0> <y0> <width> <amplitude> <offset>   b + a exp(-|x - x0|^2 / w^2)
///   file <path> [u|v|p|w]                               nodal values, see read_nodal_file
struct InitialSpec {
  enum class Kind { constant, gaussian, file };
  Kind kind = Kind::constant;
  double value = 0.0;
  Point center;
  double width = 0.1;
  double amplitude = 1.0;
  double offset = 0.0;
  std::filesystem::path path;
  std::string column;

  static InitialSpec constant_value(double c) {
    InitialSpec s;
    s.value = c;
    return s;
  }
  static InitialSpec parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

ScalarField initial_condition(const InitialSpec& spec, const TriMesh& mesh,
                              const std::string& default_column = "u");

/// Reads one value per node. Accepts a snapshot file (header `t=...`, rows
/// `x y u v p w`, `column` picks the field) or one value per line.
/// Throws ParseError / DimensionError on malformed input or length mismatch.
std::vector<double> read_nodal_file(const std::filesystem::path& path, const std::string& column,
                                    std::size_t expected);

enum class ModelPreset { full, classical, custom };

struct RunConfig {
  // [domain]
  DomainPreset domain = DomainPreset::unit_square;
  std::vector<Point> vertices;
  double h = 0.1;
  int refinements = 0;
  double grading_ratio = 1.0;  // < 1 grades toward reentrant corners
  bool require_nonobtuse = false;

  // [model]
  ModelPreset model = ModelPreset::classical;
  double chi = 5.0;
  double r1 = 1.0;
  double r_neg1 = 1.0;
  double r2 = 1.0;
  double c_f = 1.0;
  double c_g = 0.0;
  double k_deg = 1.0;
  double kappa_floor = 1e-6;
  double k_v = 1.0;
  double k_p = 1.0;
  double k_w = 1.0;
  double delta = 1.0;
  bool cutoff = true;
  std::string R1 = "0";
  std::string R2 = "0";
  std::string R3 = "0";
  std::string R4 = "0";
  std::string kappa = "1";
  std::string sigma = "-chi*u";

  // [initial]
  InitialSpec u0 = InitialSpec::constant_value(1.0);
  InitialSpec v0;
  InitialSpec p0;
  InitialSpec w0;

  // [time]
  double tau0 = 1e-3;
  double tau_min = 1e-8;
  double t_end = 0.1;
  int picard_iters = 0;
  double picard_tol = 1e-8;
  double blowup_linf = 1e6;
  double solver_tol = 1e-10;
  int solver_max_iter = 10000;
  AdaptMode adapt = AdaptMode::none;
  double max_rel_change = std::numeric_limits<double>::infinity();
  bool lumped_mass = true;

  // [output]
  std::string csv = "timeseries.csv";  // empty: no time series
  std::string snapshot_dir;            // empty: no snapshots
  int snapshot_every = 0;              // 0: initial and final only
  std::optional<Point> corner;         // unset: first reentrant corner, else vertex 0
  double corner_radius = 0.1;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError naming the key (and line) on unknown or duplicate keys,
/// type mismatches, missing required keys (domain, model, t_end) and values
/// outside their allowed range.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::filesystem::path& path);
/// Range and consistency checks shared by parse_config and programmatic use.
void validate_config(const RunConfig& config);
/// Canonical text form; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Everything needed to run a configuration.
struct Scenario {
  PolygonalDomain domain;
  TriMesh mesh;
  bool nonobtuse = false;
  CoefficientPair coefficients;
  ReactionNetwork network;
  StepConfig step;
  SimState initial;
  Point corner;
};

Scenario build_scenario(const RunConfig& config);

enum ExitCode : int {
  kExitOk = 0,
  kExitBlowup = 2,
  kExitUnderflow = 3,
  kExitSolverFailure = 4,
  kExitConfigError = 5,
  kExitIoError = 6,
};

int exit_code(RunReason reason);

inline const char* kCsvHeader =
    "step,t,tau,mass_u,mass_p_plus_w,min_u,max_u,min_v,max_v,min_p,max_p,min_w,max_w,corner_fraction,"
    "margin,clamp_active,picard_converged";

std::string csv_row(const DiagRecord& r);
void write_snapshot(const std::filesystem::path& path, const TriMesh& mesh, const SimState& state);

struct CommandResult {
  int exit_code = kExitOk;
  std::optional<RunOutcome> outcome;
};

/// Builds and runs the scenario, streams the CSV and snapshots, and prints a
/// one-line summary (`reason=... t=... steps=...`) to `summary`. Errors are
/// reported on `errors` and mapped to exit codes.
CommandResult run_command(const RunConfig& config, std::ostream& summary, std::ostream& errors);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace kschemo
