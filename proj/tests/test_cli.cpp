#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "kschemo/config.hpp"
#include "support.hpp"

using namespace kschemo;
using testing_support::ScratchDir;
using testing_support::slurp;
using testing_support::spit;

namespace {

int run_cli(const std::string& args, const std::filesystem::path& out) {
  const std::string cmd = std::string(KSCHEMO_CLI) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, DumpConfigRoundTrips) {
  ScratchDir dir("cli_dump");
  spit(dir / "in.cfg",
       "[domain]\ndomain = l_shape\nh = 0.05\n[model]\nmodel = full\nchi = 7\n[time]\nt_end = 0.3\nadapt = halving\n");
  ASSERT_EQ(run_cli("run --config " + (dir / "in.cfg").string() + " --dump-config", dir / "dump.cfg"), 0);
  const auto original = parse_config(dir / "in.cfg");
  EXPECT_EQ(parse_config(dir / "dump.cfg"), original);
  ASSERT_EQ(run_cli("run --config " + (dir / "dump.cfg").string() + " --dump-config", dir / "again.cfg"), 0);
  EXPECT_EQ(slurp(dir / "dump.cfg"), slurp(dir / "again.cfg"));
  EXPECT_EQ(run_cli("run --dump-config", dir / "defaults.cfg"), 0);
  EXPECT_EQ(parse_config(dir / "defaults.cfg"), RunConfig{});
}

TEST(Cli, RunExitCodes) {
  ScratchDir dir("cli_run");
  const std::string csv = (dir / "ts.csv").string();
  spit(dir / "ok.cfg", "[domain]\ndomain = unit_square\nh = 0.25\n[model]\nmodel = classical\n[time]\nt_end = 0.01\n"
                       "[output]\ncsv = " + csv + "\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.cfg").string(), dir / "ok.out"), 0);
  EXPECT_EQ(slurp(dir / "ok.out"), "reason=reached_t_end t=0.01 steps=10\n");

  spit(dir / "blow.cfg", "[domain]\ndomain = unit_square\nh = 0.5\n[model]\nmodel = custom\nR1 = u^2\nsigma = 0\n"
                         "[time]\nt_end = 3\ntau0 = 0.01\nblowup_linf = 50\n[output]\ncsv = " + csv + "\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "blow.cfg").string(), dir / "blow.out"), 2);

  spit(dir / "under.cfg", "[domain]\ndomain = unit_square\nh = 0.5\n[model]\nmodel = custom\nR1 = u\nsigma = 0\n"
                          "[time]\nt_end = 1\ntau0 = 0.1\ntau_min = 0.01\nadapt = halving\nmax_rel_change = 1e-12\n"
                          "[output]\ncsv = " + csv + "\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "under.cfg").string(), dir / "under.out"), 3);

  spit(dir / "solver.cfg", "[domain]\ndomain = unit_square\nh = 0.5\n[model]\nmodel = custom\nkappa = u\n"
                           "kappa_floor = 0.5\n[initial]\nu0 = constant 0.1\n[time]\nt_end = 1\n[output]\ncsv = " + csv + "\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "solver.cfg").string(), dir / "solver.out"), 4);

  spit(dir / "typo.cfg", "[domain]\ndomain = unit_square\n[model]\nmodel = classical\nch1 = 5\n[time]\nt_end = 1\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "typo.cfg").string(), dir / "typo.out"), 5);
  EXPECT_NE(slurp(dir / "typo.out").find("ch1"), std::string::npos);

  EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string(), dir / "missing.out"), 6);
  spit(dir / "io.cfg", "[domain]\ndomain = unit_square\n[model]\nmodel = classical\n[time]\nt_end = 0\n"
                       "[output]\ncsv = /nonexistent/dir/ts.csv\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "io.cfg").string(), dir / "io.out"), 6);
  EXPECT_EQ(run_cli("run", dir / "none.out"), 5);
  EXPECT_EQ(run_cli("frobnicate", dir / "bad.out"), 5);
}

TEST(Cli, MeshSubcommand) {
  ScratchDir dir("cli_mesh");
  ASSERT_EQ(run_cli("mesh --domain l_shape --h 0.25 --out " + (dir / "m.txt").string(), dir / "m.out"), 0);
  const auto mesh = load_mesh(dir / "m.txt");
  EXPECT_NE(slurp(dir / "m.out").find("nodes=" + std::to_string(mesh.node_count())), std::string::npos);
  EXPECT_EQ(run_cli("mesh --domain hexagon --h 0.25", dir / "bad.out"), 5);
  EXPECT_EQ(run_cli("mesh --domain l_shape --h 0.25 --out /nonexistent/dir/m.txt", dir / "io.out"), 6);
}

TEST(Cli, CheckSuites) {
  ScratchDir dir("cli_check");
  for (const char* suite : {"operators", "reactions", "conservation"}) {
    EXPECT_EQ(run_cli(std::string("check --suite ") + suite, dir / "out.txt"), 0) << slurp(dir / "out.txt");
    EXPECT_EQ(slurp(dir / "out.txt").find("FAIL"), std::string::npos);
  }
  EXPECT_NE(run_cli("check --suite everything", dir / "bad.txt"), 0);
}
