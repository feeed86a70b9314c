#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace kschemo {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;
using Fn4 = std::function<double(double, double, double, double)>;

/// Rates and production functions of the enzyme-complex kinetics.
struct KineticParams {
  double r1 = 1.0;
  double r_neg1 = 1.0;
  double r2 = 1.0;
  Fn1 f = [](double) { return 0.0; };          // attractant production per cell, f(v)
  Fn2 g = [](double, double) { return 0.0; };  // enzyme production per cell, g(v, p)

  /// Throws std::invalid_argument on negative or non-finite rates.
  void validate() const;
};

/// Two-species model: attractant decays at rate k(v) and is produced at u f(v).
struct SimplifiedParams {
  Fn1 k = [](double) { return 1.0; };
  Fn1 f = [](double) { return 1.0; };
};

/// Arbitrary R1..R4, each a function of (u, v, p, w).
struct CustomReactions {
  std::array<Fn4, 4> terms;
};

/// C^1 monotone clamp: identity on [-M, M], +-(M+1) beyond M+1, cubic Hermite
/// blend in between. M = delta + the largest initial sup-norm of (v, p, w).
class Cutoff {
 public:
  Cutoff(double initial_sup, double delta);

  double level() const { return level_; }  // M
  double delta() const { return delta_; }
  double initial_sup() const { return initial_sup_; }

  double operator()(double x) const;
  double derivative(double x) const;

 private:
  double initial_sup_;
  double delta_;
  double level_;
};

double eval_cutoff(const Cutoff& c, double x);

struct ReactionNetwork {
  std::variant<KineticParams, SimplifiedParams, CustomReactions> kind;
  std::optional<Cutoff> cutoff;

  static ReactionNetwork full(KineticParams params) { return {std::move(params), std::nullopt}; }
  static ReactionNetwork simplified(SimplifiedParams params) { return {std::move(params), std::nullopt}; }
  static ReactionNetwork custom(CustomReactions terms) { return {std::move(terms), std::nullopt}; }
  /// All four terms identically zero.
  static ReactionNetwork none();
};

using ReactionValues = std::array<double, 4>;

/// (R1, R2, R3, R4) at one point. With a cutoff the (v, p, w) arguments pass
/// through it for all four terms; u is never clamped.
/// Throws EvaluationError on non-finite input or output.
ReactionValues eval_reactions(const ReactionNetwork& net, double u, double v, double p, double w);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SampleBox {
  Interval u, v, p, w;
};

struct QuasipositivityWitness {
  int species = 0;  // 2, 3 or 4 (the R index whose sign condition failed)
  std::array<double, 4> point{};
  double value = 0.0;
};

struct QuasipositivityReport {
  bool ok = true;
  std::optional<QuasipositivityWitness> witness;
};

/// Samples R2(u,0,p,w) >= 0, R3(u,v,0,w) >= 0 and R4(u,v,p,0) >= 0 on a grid of
/// `samples` points per axis (endpoints included). Negative lower bounds of the
/// v, p, w ranges are raised to 0. A falsifier: ok=true proves nothing beyond
/// the sampled points.
QuasipositivityReport check_quasipositivity(const ReactionNetwork& net, const SampleBox& box,
                                            int samples);

/// Largest |R_i| over the grid, for each i. Used for the L-infinity growth bound.
std::array<double, 4> sup_abs_reactions(const ReactionNetwork& net, const SampleBox& box,
                                        int samples);

/// Diffusion coefficient kappa(u, v) > 0 and chemotactic sensitivity sigma(u, v).
struct CoefficientPair {
  Fn2 kappa;
  Fn2 sigma;
  double kappa_floor = 1e-6;
  bool builtin = false;

  /// kappa = 1, sigma = -chi u.
  static CoefficientPair classical(double chi, double kappa_floor = 1e-6);
  /// kappa = 1, sigma = 0.
  static CoefficientPair pure_diffusion(double kappa = 1.0, double kappa_floor = 1e-6);
};

struct Coefficients {
  double kappa = 0.0;
  double sigma = 0.0;
};

/// Throws EvaluationError for non-finite results and std::logic_error when a
/// built-in preset violates its own floor.
Coefficients eval_coefficients(const CoefficientPair& cp, double u, double v);

}  // namespace kschemo
