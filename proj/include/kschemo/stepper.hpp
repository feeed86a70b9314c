#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kschemo/diagnostics.hpp"
#include "kschemo/operator.hpp"
#include "kschemo/reactions.hpp"
#include "kschemo/state.hpp"

namespace kschemo {

enum class AdaptMode { none, halving };

struct Diffusion {
  double k_v = 1.0;
  double k_p = 1.0;
  double k_w = 1.0;

  friend bool operator==(const Diffusion&, const Diffusion&) = default;
};

struct StepConfig {
  double tau0 = 1e-3;
  double tau_min = 1e-8;
  double t_end = 0.1;
  int picard_iters = 0;
  double picard_tol = 1e-8;
  double blowup_linf = 1e6;
  Diffusion diffusion;
  double solver_tol = 1e-10;
  int solver_max_iter = 10000;
  AdaptMode adapt = AdaptMode::none;
  /// Halving mode only: a step that changes any field by more than this,
  /// relative to max(|old|_inf, 1), is rejected and retried at tau/2.
  double max_rel_change = std::numeric_limits<double>::infinity();
  bool lumped_mass = true;
  bool apply_cutoff = true;
  double cutoff_delta = 1.0;
  Backend backend = Backend::openmp;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  friend bool operator==(const StepConfig&, const StepConfig&) = default;
};

enum class RunReason { reached_t_end, blowup_detected, step_underflow, solver_failure };
std::string to_string(RunReason reason);

struct RunOutcome {
  RunReason reason = RunReason::reached_t_end;
  SimState final_state;
  std::vector<DiagRecord> series;
  long steps = 0;           // accepted steps
  long rejected_steps = 0;  // retries after tau halving
  std::string message;      // detail for failures
};

enum class StepStatus { success, failure };

struct TauDecision {
  double tau = 0.0;
  bool underflow = false;
};

/// success: min(1.2 tau, tau0). failure: tau/2, or underflow when that drops below tau_min.
TauDecision adapt_timestep(StepStatus status, double tau, const StepConfig& config);

struct VpwFields {
  ScalarField v;
  ScalarField p;
  ScalarField w;
};

struct AdvanceResult {
  SimState state;
  bool picard_converged = true;
  int picard_iterations = 0;
};

/// One-step operators of the decoupled first-order IMEX scheme on a fixed mesh.
/// Diffusion is implicit, reactions explicit through the network (clamped if
/// it carries a cutoff), and the u-equation uses lagged coefficients.
class Stepper {
 public:
  Stepper(const TriMesh& mesh, StepConfig config, CoefficientPair coefficients, ReactionNetwork network);

  /// For x in (v, p, w): (M + tau k_x K1) x_new = M (x_old + tau R_x(u_stage, v_old, p_old, w_old)).
  VpwFields step_vpw(const SimState& state, const ScalarField& u_stage, double tau) const;

  /// (M + tau K(kappa)) u_new = M (u_old + tau R1(u_old, v_stage, p, w)) - tau K(sigma) v_stage,
  /// kappa and sigma evaluated nodewise at (u_old, v_stage). Throws CoefficientError
  /// when kappa drops below its floor.
  ScalarField step_u(const SimState& state, const ScalarField& v_stage, const ScalarField& p,
                     const ScalarField& w, double tau) const;

  /// step_vpw with u_stage = u_old, then step_u with v_stage = v_new; repeated
  /// picard_iters more times feeding the latest u back as u_stage.
  AdvanceResult advance(const SimState& state, double tau) const;

  const StepConfig& config() const { return config_; }
  const ReactionNetwork& network() const { return network_; }
  const P1Assembler& assembler() const { return assembler_; }
  const SparseOperator& mass() const { return mass_; }

 private:
  ScalarField solve(const SparseOperator& system, std::vector<double> rhs, const ScalarField& guess) const;
  std::vector<double> apply_mass(std::vector<double> x) const;

  const TriMesh* mesh_;
  StepConfig config_;
  CoefficientPair coefficients_;
  ReactionNetwork network_;
  P1Assembler assembler_;
  SparseOperator mass_;
  SparseOperator unit_stiffness_;
};

struct RunHooks {
  /// Called for every accepted state, starting with the initial one.
  std::function<void(const DiagRecord&, const SimState&)> on_record;
  /// Corner for the concentration diagnostic; defaults to the mesh's first corner node.
  std::optional<Point> corner;
  double corner_radius = 0.1;
};

/// Time-marches until t_end or a termination trigger. The cutoff level is
/// computed from `initial` and `config.cutoff_delta`.
RunOutcome run(const TriMesh& mesh, const SimState& initial, const StepConfig& config,
               const CoefficientPair& coefficients, const ReactionNetwork& network,
               const RunHooks& hooks = {});

/// The cutoff `run` would build for this initial state.
Cutoff cutoff_for(const SimState& initial, double delta);

}  // namespace kschemo
