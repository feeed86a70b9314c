#include "kschemo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kschemo/config.hpp"
#include "kschemo/diagnostics.hpp"
#include "kschemo/mesh.hpp"
#include "kschemo/operator.hpp"
#include "kschemo/reactions.hpp"
#include "kschemo/stepper.hpp"

namespace kschemo {

namespace {

CheckResult verdict(std::string name, double value, double bound) {
  return {std::move(name), value <= bound, "value " + format_double(value) + " bound " + format_double(bound)};
}

TriMesh reference_triangle() { return TriMesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{0, 1, 2}}); }

TriMesh mesh_of(DomainPreset preset, double h) {
  MeshOptions opts;
  opts.h_target = h;
  return triangulate(make_domain(preset), opts).mesh;
}

std::vector<CheckResult> operator_suite() {
  std::vector<CheckResult> out;
  {
    const TriMesh ref = reference_triangle();
    const auto k = assemble_stiffness(ref, ScalarField(ref, 1.0));
    const double expect_k[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    const auto m = assemble_mass(ref, false);
    double err_k = 0.0, err_m = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        err_k = std::max(err_k, std::abs(k.entry(i, j) - expect_k[i][j]));
        err_m = std::max(err_m, std::abs(m.entry(i, j) - (i == j ? 1.0 / 12.0 : 1.0 / 24.0)));
      }
    }
    out.push_back(verdict("reference stiffness", err_k, 1e-14));
    out.push_back(verdict("reference mass", err_m, 1e-14));
  }

  const TriMesh mesh = mesh_of(DomainPreset::l_shape, 0.1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mu_dist(0.5, 2.0);
  std::vector<double> mu(mesh.node_count());
  for (auto& x : mu) x = mu_dist(rng);
  const ScalarField mu_field(mesh, mu);
  const auto k_serial = assemble_stiffness(mesh, mu_field, Backend::serial);
  const auto k_omp = assemble_stiffness(mesh, mu_field, Backend::openmp);
  out.push_back(verdict("stiffness symmetry", k_serial.asymmetry(), 1e-14 * k_serial.max_abs()));
  out.push_back(verdict("stiffness row sums", k_serial.max_row_sum(), 1e-12 * k_serial.max_abs()));
  out.push_back({"serial and parallel assembly agree",
                 std::equal(k_serial.values().begin(), k_serial.values().end(), k_omp.values().begin()), ""});

  const auto mc = assemble_mass(mesh, false);
  const auto ml = assemble_mass(mesh, true);
  double sum_c = 0.0, sum_l = 0.0;
  for (const double v : mc.values()) sum_c += v;
  for (const double v : ml.values()) sum_l += v;
  out.push_back(verdict("consistent mass total", std::abs(sum_c - mesh.total_area()), 1e-13));
  out.push_back(verdict("lumped mass total", std::abs(sum_l - mesh.total_area()), 1e-13));

  if (mesh.is_nonobtuse()) {
    double worst = 0.0;
    const auto& pat = k_serial.pattern();
    for (std::size_t i = 0; i < pat.dimension(); ++i) {
      for (std::size_t s = pat.row_ptr()[i]; s < pat.row_ptr()[i + 1]; ++s) {
        if (static_cast<std::size_t>(pat.cols()[s]) != i) worst = std::max(worst, k_serial.values()[s]);
      }
    }
    out.push_back(verdict("nonpositive off-diagonal on nonobtuse mesh", worst, 1e-14));
  }

  const auto system = SparseOperator::combine(1.0, ml, 1e-2, k_serial);
  std::vector<double> b(mesh.node_count());
  for (auto& x : b) x = mu_dist(rng);
  SolveOptions opts;
  opts.tol = 1e-12;
  const auto sol = solve_spd(system, b, opts);
  const auto ax = kschemo::apply(system, sol.x);
  double res = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    res += (ax[i] - b[i]) * (ax[i] - b[i]);
    nb += b[i] * b[i];
  }
  out.push_back(verdict("conjugate gradient residual", std::sqrt(res / nb), 1e-11));
  return out;
}

std::vector<CheckResult> reaction_suite() {
  std::vector<CheckResult> out;
  const Cutoff eta(2.0, 1.0);
  double identity_err = 0.0, jump = 0.0, mono = 0.0, bound = 0.0;
  for (int i = -4000; i <= 4000; ++i) {
    const double x = i * 1e-3;
    if (std::abs(x) <= eta.level()) identity_err = std::max(identity_err, std::abs(eta(x) - x));
    bound = std::max(bound, std::abs(eta(x)) - (eta.level() + 1.0));
    const double next = eta(x + 1e-3);
    mono = std::max(mono, eta(x) - next);
    jump = std::max(jump, std::abs(next - eta(x)));
  }
  out.push_back(verdict("cutoff is the identity below its level", identity_err, 0.0));
  out.push_back(verdict("cutoff is bounded by level + 1", bound, 0.0));
  out.push_back(verdict("cutoff is nondecreasing", mono, 0.0));
  out.push_back(verdict("cutoff is continuous", jump, 1.5e-3));

  KineticParams kp;
  kp.f = [](double v) { return v; };
  kp.g = [](double, double p) { return p; };
  const auto full = ReactionNetwork::full(kp);
  const SampleBox box{{-2, 2}, {0, 3}, {0, 3}, {0, 3}};
  const auto report = check_quasipositivity(full, box, 9);
  out.push_back({"enzyme kinetics are quasipositive", report.ok, ""});

  KineticParams constant_source;
  constant_source.f = [](double) { return 1.0; };
  const auto counter = check_quasipositivity(ReactionNetwork::full(constant_source), box, 9);
  out.push_back({"negative cells with constant production are detected", !counter.ok,
                 counter.witness ? "species " + std::to_string(counter.witness->species) : ""});

  double exchange = 0.0;
  for (double v : {0.0, 0.7, 2.0}) {
    for (double p : {0.0, 1.3}) {
      for (double w : {0.0, 0.4, 2.5}) {
        const auto r = eval_reactions(ReactionNetwork::full(KineticParams{}), 1.0, v, p, w);
        exchange = std::max(exchange, std::abs(r[2] + r[3]));
      }
    }
  }
  out.push_back(verdict("free and bound enzyme exchange cancels without production", exchange, 1e-14));

  auto clamped = ReactionNetwork::full(KineticParams{});
  clamped.cutoff = eta;
  const double cap = eta.level() + 1.0;
  const auto big = eval_reactions(clamped, 0.0, 1e6, 1e6, 1e6);
  const auto at_cap = eval_reactions(ReactionNetwork::full(KineticParams{}), 0.0, cap, cap, cap);
  out.push_back(verdict("clamped kinetics saturate", std::abs(big[1] - at_cap[1]), 1e-12));
  return out;
}

std::vector<CheckResult> conservation_suite() {
  std::vector<CheckResult> out;
  const TriMesh mesh = mesh_of(DomainPreset::l_shape, 0.1);
  StepConfig cfg;
  cfg.tau0 = 1e-3;
  cfg.t_end = 0.02;
  cfg.solver_tol = 1e-13;
  KineticParams kp;
  kp.f = [](double v) { return 0.5 * v; };
  SimState s0 = SimState::zeros(mesh);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const Point x = mesh.nodes()[i];
    s0.u[i] = 1.0 + std::exp(-(x.x * x.x + x.y * x.y) / 0.1);
    s0.v[i] = 0.5;
    s0.p[i] = std::exp(-((x.x - 0.5) * (x.x - 0.5) + x.y * x.y) / 0.2);
    s0.w[i] = 0.1;
  }
  const auto outcome = run(mesh, s0, cfg, CoefficientPair::classical(2.0), ReactionNetwork::full(kp));
  const auto& first = outcome.series.front();
  const auto& last = outcome.series.back();
  out.push_back({"run completes", outcome.reason == RunReason::reached_t_end, to_string(outcome.reason)});
  out.push_back(verdict("cell mass drift", std::abs(last.mass_u - first.mass_u) / std::abs(first.mass_u), 1e-8));
  out.push_back(verdict("enzyme total drift",
                        std::abs(last.mass_p_plus_w - first.mass_p_plus_w) / std::abs(first.mass_p_plus_w), 1e-8));
  double min_vpw = 0.0;
  for (const auto& r : outcome.series) min_vpw = std::min({min_vpw, r.v.min, r.p.min, r.w.min});
  out.push_back(verdict("attractant and enzymes stay nonnegative", -min_vpw, 1e-10));
  out.push_back(verdict("initial margin equals delta", std::abs(first.margin - cfg.cutoff_delta), 0.0));
  return out;
}

}  // namespace

const std::vector<std::string>& check_suite_names() {
  static const std::vector<std::string> names{"operators", "reactions", "conservation"};
  return names;
}

std::vector<CheckResult> run_check_suite(const std::string& suite) {
  if (suite == "operators") return operator_suite();
  if (suite == "reactions") return reaction_suite();
  if (suite == "conservation") return conservation_suite();
  throw std::invalid_argument("unknown check suite '" + suite + "'");
}

}  // namespace kschemo
