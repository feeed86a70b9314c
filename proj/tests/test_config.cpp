#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kschemo/config.hpp"
#include "kschemo/error.hpp"
#include "kschemo/expression.hpp"
#include "support.hpp"

using namespace kschemo;
using testing_support::ScratchDir;
using testing_support::slurp;
using testing_support::spit;

namespace {

RunConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

const char* kMinimal =
    "[domain]\n"
    "domain = unit_square\n"
    "[model]\n"
    "model = classical\n"
    "chi = 5\n"
    "[time]\n"
    "t_end = 0.1\n";

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  const auto& h = rows.at(0);
  return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
}

}  // namespace

TEST(Expression, ArithmeticAndPrecedence) {
  const std::vector<std::string> vars{"u", "v"};
  const std::array<double, 2> x{2.0, 3.0};
  EXPECT_EQ(Expression("1 + 2*u - v/3", vars)(x), 4.0);
  EXPECT_EQ(Expression("2^3^2", vars)(x), 512.0);
  EXPECT_EQ(Expression("-u^2", vars)(x), -4.0);
  EXPECT_EQ(Expression("(u + v) * 2", vars)(x), 10.0);
  EXPECT_EQ(Expression("max(u, v) - min(u, v)", vars)(x), 1.0);
  EXPECT_EQ(Expression("pow(u, 3)", vars)(x), 8.0);
  EXPECT_DOUBLE_EQ(Expression("exp(log(v)) + sqrt(abs(-4))", vars)(x), 5.0);
  EXPECT_DOUBLE_EQ(Expression("1.5e-1 * chi", vars, {{"chi", 10.0}})(x), 1.5);
  EXPECT_TRUE(Expression("0", vars).is_zero());
  EXPECT_FALSE(Expression("u", vars).is_zero());
}

TEST(Expression, Errors) {
  const std::vector<std::string> vars{"u"};
  EXPECT_THROW(Expression("u +", vars), ParseError);
  EXPECT_THROW(Expression("q", vars), ParseError);
  EXPECT_THROW(Expression("foo(u)", vars), ParseError);
  EXPECT_THROW(Expression("(u", vars), ParseError);
  EXPECT_THROW(Expression("u u", vars), ParseError);
  EXPECT_THROW(Expression("max(u)", vars), ParseError);
}

TEST(ParseConfig, MinimalClassicalGetsDefaults) {
  const auto c = parse_text(kMinimal);
  RunConfig expected;
  expected.chi = 5.0;
  expected.t_end = 0.1;
  EXPECT_EQ(c, expected);
  EXPECT_EQ(c.model, ModelPreset::classical);
  EXPECT_EQ(c.domain, DomainPreset::unit_square);
  EXPECT_EQ(c.tau0, 1e-3);
  EXPECT_EQ(c.csv, "timeseries.csv");
}

TEST(ParseConfig, KappaFloorMustBePositive) {
  try {
    parse_text(std::string(kMinimal) + "[model]\nkappa_floor = 0\n");
    FAIL() << "accepted kappa_floor = 0";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "kappa_floor");
    EXPECT_EQ(e.line(), 9u);
  }
}

TEST(ParseConfig, MisspelledKeyIsNamed) {
  try {
    parse_text("[domain]\ndomain = l_shape\n[model]\nmodel = classical\nch1 = 5\n[time]\nt_end = 1\n");
    FAIL() << "accepted ch1";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "ch1");
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("ch1"), std::string::npos);
  }
}

TEST(ParseConfig, OtherErrors) {
  const auto key_of = [](const std::string& text) {
    try {
      parse_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<accepted>");
  };
  EXPECT_EQ(key_of("[domain]\ndomain = unit_square\n[model]\nmodel = full\n"), "t_end");
  EXPECT_EQ(key_of("[model]\nmodel = full\n[time]\nt_end = 1\n"), "domain");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[time]\ntau0 = fast\n"), "tau0");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[time]\nt_end = 2\n"), "t_end");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[output]\nchi = 2\n"), "chi");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[model]\nmodel = fancy\n"), "model");
  EXPECT_EQ(key_of("[domain]\ndomain = hexagon\n[model]\nmodel = full\n[time]\nt_end = 1\n"), "domain");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[model]\nR1 = u^\n"), "R1");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[initial]\nu0 = gaussian 0 0\n"), "u0");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[time]\ntau_min = 1\n"), "tau_min");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[time]\nadapt = sometimes\n"), "adapt");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[physics]\n"), "physics");
  EXPECT_EQ(key_of(std::string(kMinimal) + "just words\n"), "just words");
  EXPECT_EQ(key_of(std::string(kMinimal) + "[domain]\nrequire_nonobtuse = maybe\n"), "require_nonobtuse");
}

TEST(ParseConfig, CommentsAndBlankLines) {
  const auto c = parse_text("# header\n\n[domain]\ndomain = l_shape   # the L\n[model]\nmodel = full\n[time]\nt_end = 0.5\n");
  EXPECT_EQ(c.domain, DomainPreset::l_shape);
  EXPECT_EQ(c.t_end, 0.5);
}

TEST(ParseConfig, RoundTrip) {
  RunConfig c;
  EXPECT_EQ(parse_text(emit_config(c)), c);
  c.domain = DomainPreset::custom;
  c.vertices = {{0, 0}, {2, 0}, {1, 1.0 / 3.0}};
  c.h = 0.123456789;
  c.refinements = 2;
  c.grading_ratio = 0.3;
  c.model = ModelPreset::custom;
  c.R1 = "u^2 - 0.1*u";
  c.R2 = "-k_deg*v + u";
  c.kappa = "1 + 0.5*v^2";
  c.sigma = "-chi*u/(1+u)";
  c.chi = 0.1;
  c.u0 = InitialSpec::parse("gaussian 0.5 0.25 0.1 3 0.2");
  c.v0 = InitialSpec::parse("file data/v.txt v");
  c.p0 = InitialSpec::constant_value(1e-300);
  c.adapt = AdaptMode::halving;
  c.max_rel_change = 0.1;
  c.lumped_mass = false;
  c.cutoff = false;
  c.csv = "";
  c.snapshot_dir = "out/snaps";
  c.snapshot_every = 10;
  c.corner = Point{0.5, 0.5};
  c.t_end = 0.7;
  const std::string text = emit_config(c);
  const auto back = parse_text(text);
  EXPECT_EQ(back, c) << text;
  EXPECT_EQ(emit_config(back), text);
}

TEST(InitialCondition, Shapes) {
  const auto mesh = testing_support::square_mesh(0.1);
  const auto c = initial_condition(InitialSpec::constant_value(3.0), mesh);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) EXPECT_EQ(c[i], 3.0);

  const auto g = initial_condition(InitialSpec::parse("gaussian 0.3 0.7 0.2 2.5 0"), mesh);
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (g[i] > g[argmax]) argmax = i;
  }
  EXPECT_NEAR(mesh.nodes()[argmax].x, 0.3, 1e-12);
  EXPECT_NEAR(mesh.nodes()[argmax].y, 0.7, 1e-12);
  EXPECT_EQ(g[argmax], 2.5);
  const Point q = mesh.nodes()[0];
  const double r2 = (q.x - 0.3) * (q.x - 0.3) + (q.y - 0.7) * (q.y - 0.7);
  EXPECT_NEAR(g[0], 2.5 * std::exp(-r2 / 0.04), 1e-14 * g[0]);
}

TEST(InitialCondition, FileRoundTripsWithSnapshots) {
  ScratchDir dir("nodal");
  const auto mesh = testing_support::l_mesh(0.1);
  SimState s = SimState::zeros(mesh);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    s.u[i] = std::sin(static_cast<double>(i));
    s.v[i] = 1.0 / 3.0 + static_cast<double>(i);
    s.w[i] = -1e-17 * static_cast<double>(i);
  }
  s.t = 0.1 + 0.2;
  write_snapshot(dir / "snap.txt", mesh, s);
  EXPECT_EQ(slurp(dir / "snap.txt").substr(0, 21), "t=0.30000000000000004");
  EXPECT_EQ(initial_condition(InitialSpec::parse("file " + (dir / "snap.txt").string()), mesh, "u"), s.u);
  EXPECT_EQ(initial_condition(InitialSpec::parse("file " + (dir / "snap.txt").string()), mesh, "v"), s.v);
  EXPECT_EQ(initial_condition(InitialSpec::parse("file " + (dir / "snap.txt").string() + " w"), mesh, "u"), s.w);

  std::string plain;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) plain += format_double(0.5 * static_cast<double>(i)) + "\n";
  spit(dir / "plain.txt", plain);
  const auto f = initial_condition(InitialSpec::parse("file " + (dir / "plain.txt").string()), mesh);
  EXPECT_EQ(f[4], 2.0);

  spit(dir / "short.txt", "1\n2\n3\n");
  EXPECT_THROW(initial_condition(InitialSpec::parse("file " + (dir / "short.txt").string()), mesh), DimensionError);
  spit(dir / "bad.txt", "1\nfoo\n");
  EXPECT_THROW(read_nodal_file(dir / "bad.txt", "u", 2), ParseError);
  EXPECT_THROW(read_nodal_file(dir / "missing.txt", "u", 2), IoError);
}

TEST(BuildScenario, PresetsAndCorner) {
  RunConfig c;
  c.domain = DomainPreset::l_shape;
  c.model = ModelPreset::full;
  c.c_f = 2.0;
  const auto sc = build_scenario(c);
  EXPECT_EQ(sc.corner, (Point{0.5, 0.5}));
  EXPECT_TRUE(sc.nonobtuse);
  const auto r = eval_reactions(sc.network, 1.5, 0.0, 0.0, 0.0);
  EXPECT_EQ(r[1], 3.0);
  EXPECT_EQ(eval_coefficients(sc.coefficients, 2.0, 0.0).sigma, -10.0);

  c.model = ModelPreset::custom;
  c.R1 = "r1*u*(1-u)";
  c.r1 = 4.0;
  c.kappa = "1 + u";
  c.sigma = "0";
  c.refinements = 1;
  const auto sc2 = build_scenario(c);
  EXPECT_EQ(eval_reactions(sc2.network, 0.5, 0, 0, 0)[0], 1.0);
  EXPECT_EQ(eval_coefficients(sc2.coefficients, 2.0, 0.0).kappa, 3.0);
  EXPECT_EQ(sc2.mesh.triangle_count(), 4 * sc.mesh.triangle_count());

  c.grading_ratio = 0.5;
  c.refinements = 0;
  EXPECT_GT(build_scenario(c).mesh.triangle_count(), sc.mesh.triangle_count());
}

TEST(RunCommand, HeatConfig) {
  ScratchDir dir("heat");
  RunConfig c;
  c.model = ModelPreset::custom;
  c.sigma = "0";
  c.R1 = "-u";
  c.u0 = InitialSpec::parse("gaussian 0.5 0.5 0.2 1 0.5");
  c.t_end = 0.05;
  c.tau0 = 0.005;
  c.csv = (dir / "ts.csv").string();
  c.snapshot_dir = (dir / "snaps").string();
  c.snapshot_every = 4;
  std::ostringstream out, err;
  const auto res = run_command(c, out, err);
  EXPECT_EQ(res.exit_code, 0) << err.str();
  const std::string summary = out.str();
  ASSERT_EQ(summary.rfind("reason=reached_t_end t=", 0), 0u) << summary;
  EXPECT_NEAR(std::stod(summary.substr(summary.find("t=") + 2)), 0.05, 1e-15);
  EXPECT_NE(summary.find(" steps=10\n"), std::string::npos);
  const auto rows = read_csv(dir / "ts.csv");
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(slurp(dir / "ts.csv").substr(0, std::string(kCsvHeader).size()), kCsvHeader);
  const auto m = column(rows, "mass_u");
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][m]), std::stod(rows[i - 1][m]));
  for (const char* name : {"snapshot_000000.txt", "snapshot_000004.txt", "snapshot_000008.txt", "snapshot_000010.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / ("snaps/" + std::string(name)))) << name;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "snaps/snapshot_000005.txt"));

  // Pure heat keeps the mass column constant to roundoff.
  c.R1 = "0";
  c.solver_tol = 1e-14;
  ASSERT_EQ(run_command(c, out, err).exit_code, 0);
  const auto flat = read_csv(dir / "ts.csv");
  const double m0 = std::stod(flat[1][m]);
  for (std::size_t i = 2; i < flat.size(); ++i) EXPECT_NEAR(std::stod(flat[i][m]), m0, 1e-12 * m0);
}

TEST(RunCommand, OdeBlowup) {
  ScratchDir dir("blowup");
  RunConfig c;
  c.model = ModelPreset::custom;
  c.R1 = "u^2";
  c.sigma = "0";
  c.t_end = 2.0;
  c.tau0 = 0.01;
  c.blowup_linf = 50;
  c.csv = (dir / "ts.csv").string();
  std::ostringstream out, err;
  const auto res = run_command(c, out, err);
  EXPECT_EQ(res.exit_code, kExitBlowup);
  ASSERT_TRUE(res.outcome.has_value());
  EXPECT_LT(res.outcome->final_state.t, 2.0);
  const auto rows = read_csv(dir / "ts.csv");
  EXPECT_LT(std::stod(rows.back()[column(rows, "t")]), 2.0);
  EXPECT_NE(out.str().find("reason=blowup_detected"), std::string::npos);
}

TEST(RunCommand, ZeroLengthRun) {
  ScratchDir dir("zero");
  RunConfig c;
  c.t_end = 0.0;
  c.csv = (dir / "ts.csv").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_command(c, out, err).exit_code, 0);
  EXPECT_EQ(read_csv(dir / "ts.csv").size(), 2u);
  EXPECT_EQ(out.str(), "reason=reached_t_end t=0 steps=0\n");
}

TEST(RunCommand, IoAndConfigFailures) {
  RunConfig c;
  c.t_end = 0.0;
  c.csv = "/nonexistent/dir/ts.csv";
  std::ostringstream out, err;
  EXPECT_EQ(run_command(c, out, err).exit_code, kExitIoError);
  c.csv = "";
  c.u0 = InitialSpec::parse("file /nonexistent/u.txt");
  EXPECT_EQ(run_command(c, out, err).exit_code, kExitIoError);
  c.u0 = InitialSpec::constant_value(1.0);
  c.h = -1.0;
  EXPECT_EQ(run_command(c, out, err).exit_code, kExitConfigError);
  c.h = 0.1;
  c.domain = DomainPreset::custom;
  EXPECT_EQ(run_command(c, out, err).exit_code, kExitConfigError);
}

TEST(RunCommand, ExitCodes) {
  EXPECT_EQ(exit_code(RunReason::reached_t_end), 0);
  EXPECT_EQ(exit_code(RunReason::blowup_detected), 2);
  EXPECT_EQ(exit_code(RunReason::step_underflow), 3);
  EXPECT_EQ(exit_code(RunReason::solver_failure), 4);
}

TEST(RunCommand, IdenticalConfigsGiveIdenticalCsv) {
  ScratchDir dir("determinism");
  RunConfig c;
  c.domain = DomainPreset::l_shape;
  c.model = ModelPreset::full;
  c.u0 = InitialSpec::parse("gaussian 0.25 0.25 0.15 2 0.1");
  c.p0 = InitialSpec::constant_value(0.5);
  c.t_end = 0.02;
  std::ostringstream out, err;
  c.csv = (dir / "a.csv").string();
  ASSERT_EQ(run_command(c, out, err).exit_code, 0);
  c.csv = (dir / "b.csv").string();
  ASSERT_EQ(run_command(c, out, err).exit_code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}
