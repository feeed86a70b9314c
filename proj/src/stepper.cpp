#include "kschemo/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kschemo/error.hpp"

namespace kschemo {

namespace {

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Largest relative sup-norm change over the four fields.
double relative_change(const SimState& from, const SimState& to, double floor) {
  const auto rel = [floor](const ScalarField& a, const ScalarField& b) {
    return max_abs_diff(a, b) / std::max(sup_norm(a), floor);
  };
  return std::max({rel(from.u, to.u), rel(from.v, to.v), rel(from.p, to.p), rel(from.w, to.w)});
}

}  // namespace

void StepConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(std::isfinite(tau0) && tau0 > 0.0, "tau0 must be positive");
  require(std::isfinite(tau_min) && tau_min > 0.0 && tau_min <= tau0, "tau_min must lie in (0, tau0]");
  require(std::isfinite(t_end) && t_end >= 0.0, "t_end must be nonnegative");
  require(picard_iters >= 0, "picard_iters must be nonnegative");
  require(picard_tol > 0.0, "picard_tol must be positive");
  require(blowup_linf > 0.0, "blowup_linf must be positive");
  require(diffusion.k_v > 0.0 && diffusion.k_p > 0.0 && diffusion.k_w > 0.0,
          "diffusion constants must be positive");
  require(solver_tol > 0.0 && solver_tol < 1.0, "solver_tol must lie in (0, 1)");
  require(solver_max_iter > 0, "solver_max_iter must be positive");
  require(max_rel_change > 0.0, "max_rel_change must be positive");
  require(std::isfinite(cutoff_delta) && cutoff_delta > 0.0, "cutoff_delta must be positive");
}

std::string to_string(RunReason reason) {
  switch (reason) {
    case RunReason::reached_t_end: return "reached_t_end";
    case RunReason::blowup_detected: return "blowup_detected";
    case RunReason::step_underflow: return "step_underflow";
    case RunReason::solver_failure: return "solver_failure";
  }
  return "?";
}

TauDecision adapt_timestep(StepStatus status, double tau, const StepConfig& config) {
  if (status == StepStatus::success) return {std::min(tau * 1.2, config.tau0), false};
  const double half = tau / 2.0;
  if (half < config.tau_min) return {half, true};
  return {half, false};
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const TriMesh& mesh, StepConfig config, CoefficientPair coefficients,
                 ReactionNetwork network)
    : mesh_(&mesh),
      config_(config),
      coefficients_(std::move(coefficients)),
      network_(std::move(network)),
      assembler_(mesh, config.backend),
      mass_(assembler_.mass(config.lumped_mass)),
      unit_stiffness_(assembler_.stiffness(1.0)) {
  config_.validate();
}

std::vector<double> Stepper::apply_mass(std::vector<double> x) const {
  if (config_.lumped_mass) {
    const auto& m = assembler_.lumped_weights();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= m[i];
    return x;
  }
  return apply(mass_, x, config_.backend);
}

ScalarField Stepper::solve(const SparseOperator& system, std::vector<double> rhs,
                           const ScalarField& guess) const {
  SolveOptions opts;
  opts.tol = config_.solver_tol;
  opts.max_iter = config_.solver_max_iter;
  opts.backend = config_.backend;
  auto result = solve_spd(system, rhs, opts, guess.values());
  return ScalarField(*mesh_, std::move(result.x));
}

VpwFields Stepper::step_vpw(const SimState& state, const ScalarField& u_stage, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!state.shares_mesh() || !u_stage.same_mesh(state.u)) throw DimensionError("fields on different meshes");
  const std::size_t n = state.u.size();
  std::vector<double> rv(n), rp(n), rw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = eval_reactions(network_, u_stage[i], state.v[i], state.p[i], state.w[i]);
    rv[i] = state.v[i] + tau * r[1];
    rp[i] = state.p[i] + tau * r[2];
    rw[i] = state.w[i] + tau * r[3];
  }
  const auto& d = config_.diffusion;
  // The three systems are independent; each solve is parallel internally.
  auto v = solve(SparseOperator::combine(1.0, mass_, tau * d.k_v, unit_stiffness_), apply_mass(std::move(rv)),
                 state.v);
  auto p = solve(SparseOperator::combine(1.0, mass_, tau * d.k_p, unit_stiffness_), apply_mass(std::move(rp)),
                 state.p);
  auto w = solve(SparseOperator::combine(1.0, mass_, tau * d.k_w, unit_stiffness_), apply_mass(std::move(rw)),
                 state.w);
  return {std::move(v), std::move(p), std::move(w)};
}

ScalarField Stepper::step_u(const SimState& state, const ScalarField& v_stage, const ScalarField& p,
                            const ScalarField& w, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!v_stage.same_mesh(state.u) || !p.same_mesh(state.u) || !w.same_mesh(state.u)) {
    throw DimensionError("fields on different meshes");
  }
  const std::size_t n = state.u.size();
  std::vector<double> kappa(n), sigma(n), rhs(n);
  bool any_sigma = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = eval_coefficients(coefficients_, state.u[i], v_stage[i]);
    if (!(c.kappa >= coefficients_.kappa_floor)) {
      throw CoefficientError("diffusion coefficient " + std::to_string(c.kappa) + " at node " +
                             std::to_string(i) + " is below the floor " +
                             std::to_string(coefficients_.kappa_floor));
    }
    kappa[i] = c.kappa;
    sigma[i] = c.sigma;
    any_sigma = any_sigma || c.sigma != 0.0;
    const auto r = eval_reactions(network_, state.u[i], v_stage[i], p[i], w[i]);
    rhs[i] = state.u[i] + tau * r[0];
  }
  rhs = apply_mass(std::move(rhs));
  if (any_sigma) {
    // Weak form of div(sigma grad v) is -K(sigma) v.
    const auto drift = apply(assembler_.stiffness(ScalarField(*mesh_, std::move(sigma))), v_stage.values(),
                             config_.backend);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= tau * drift[i];
  }
  const auto system =
      SparseOperator::combine(1.0, mass_, tau, assembler_.stiffness(ScalarField(*mesh_, std::move(kappa))));
  return solve(system, std::move(rhs), state.u);
}

AdvanceResult Stepper::advance(const SimState& state, double tau) const {
  AdvanceResult out{state, config_.picard_iters == 0, 0};
  const ScalarField* u_stage = &state.u;
  for (int k = 0; k <= config_.picard_iters; ++k) {
    auto vpw = step_vpw(state, *u_stage, tau);
    auto u = step_u(state, vpw.v, vpw.p, vpw.w, tau);
    SimState next{state.t + tau, std::move(u), std::move(vpw.v), std::move(vpw.p), std::move(vpw.w)};
    if (k > 0) {
      out.picard_iterations = k;
      const double change = relative_change(out.state, next, std::numeric_limits<double>::min());
      out.state = std::move(next);
      if (change <= config_.picard_tol) {
        out.picard_converged = true;
        break;
      }
    } else {
      out.state = std::move(next);
    }
    u_stage = &out.state.u;
  }
  return out;
}

// ---------------------------------------------------------------------------

Cutoff cutoff_for(const SimState& initial, double delta) {
  return Cutoff(std::max({sup_norm(initial.v), sup_norm(initial.p), sup_norm(initial.w)}), delta);
}

RunOutcome run(const TriMesh& mesh, const SimState& initial, const StepConfig& config,
               const CoefficientPair& coefficients, const ReactionNetwork& network, const RunHooks& hooks) {
  config.validate();
  if (!initial.shares_mesh() || initial.u.mesh_id() != mesh.id()) {
    throw DimensionError("initial state does not live on the given mesh");
  }
  if (!initial.all_finite()) throw InputError("initial state contains non-finite values");

  const Cutoff clamp = cutoff_for(initial, config.cutoff_delta);
  ReactionNetwork net = network;
  net.cutoff = config.apply_cutoff ? std::optional<Cutoff>(clamp) : std::nullopt;
  const Stepper stepper(mesh, config, coefficients, std::move(net));

  Point corner = mesh.nodes().front();
  if (hooks.corner) {
    corner = *hooks.corner;
  } else if (!mesh.corner_nodes().empty()) {
    corner = mesh.nodes()[static_cast<std::size_t>(mesh.corner_nodes().front())];
  }
  const Diagnostics diag(mesh, corner, hooks.corner_radius);

  RunOutcome out{RunReason::reached_t_end, initial, {}, 0, 0, {}};
  SimState& state = out.final_state;
  const auto emit = [&](double tau, bool picard_converged) {
    out.series.push_back(diag.record(out.steps, tau, state, clamp, picard_converged));
    if (hooks.on_record) hooks.on_record(out.series.back(), state);
  };
  emit(0.0, true);

  double tau = config.tau0;
  const bool halving = config.adapt == AdaptMode::halving;
  while (state.t < config.t_end - 0.5 * config.tau_min) {
    const double tau_try = std::min(tau, config.t_end - state.t);
    std::optional<AdvanceResult> adv;
    bool non_finite = false;
    try {
      adv = stepper.advance(state, tau_try);
      if (!adv->state.all_finite()) {
        non_finite = true;
        out.message = "non-finite field after step";
      } else if (halving && relative_change(state, adv->state, 1.0) > config.max_rel_change) {
        out.message = "step change exceeded max_rel_change";
      } else {
        out.message.clear();
      }
    } catch (const EvaluationError& e) {
      non_finite = true;
      out.message = e.what();
    } catch (const InputError& e) {
      non_finite = true;
      out.message = e.what();
    } catch (const SolverError& e) {
      out.message = e.what();
    } catch (const CoefficientError& e) {
      out.message = e.what();
    }

    if (!out.message.empty()) {
      if (!halving) {
        out.reason = non_finite ? RunReason::blowup_detected : RunReason::solver_failure;
        return out;
      }
      const auto decision = adapt_timestep(StepStatus::failure, tau_try, config);
      if (decision.underflow) {
        out.reason = RunReason::step_underflow;
        return out;
      }
      tau = decision.tau;
      ++out.rejected_steps;
      continue;
    }

    state = std::move(adv->state);
    ++out.steps;
    emit(tau_try, adv->picard_converged);
    if (sup_norm(state.u) > config.blowup_linf) {
      out.reason = RunReason::blowup_detected;
      out.message = "sup-norm of u exceeded blowup_linf";
      return out;
    }
    if (halving) tau = adapt_timestep(StepStatus::success, tau, config).tau;
  }
  out.reason = RunReason::reached_t_end;
  return out;
}

}  // namespace kschemo
