#include "kschemo/reactions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kschemo/error.hpp"

namespace kschemo {

namespace {

bool finite4(double a, double b, double c, double d) {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> grid(Interval iv, int samples) {
  std::vector<double> out;
  if (samples <= 1 || iv.lo == iv.hi) {
    out.push_back(iv.lo);
    if (iv.hi != iv.lo) out.push_back(iv.hi);
    return out;
  }
  for (int k = 0; k < samples; ++k) {
    out.push_back(k + 1 == samples ? iv.hi : iv.lo + (iv.hi - iv.lo) * k / (samples - 1));
  }
  return out;
}

}  // namespace

void KineticParams::validate() const {
  for (const double r : {r1, r_neg1, r2}) {
    if (!(std::isfinite(r) && r >= 0.0)) {
      throw std::invalid_argument("reaction rates must be finite and nonnegative");
    }
  }
  if (!f || !g) throw std::invalid_argument("production functions f and g must be set");
}

// ---------------------------------------------------------------------------

Cutoff::Cutoff(double initial_sup, double delta)
    : initial_sup_(initial_sup), delta_(delta), level_(delta + initial_sup) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("cutoff delta must be positive");
  if (!(initial_sup >= 0.0) || !std::isfinite(initial_sup)) {
    throw std::invalid_argument("cutoff initial sup-norm must be finite and nonnegative");
  }
}

double Cutoff::operator()(double x) const {
  const double a = std::abs(x);
  if (a <= level_) return x;
  if (a >= level_ + 1.0) return std::copysign(level_ + 1.0, x);
  // h(s) = s + s^2 - s^3: h(0)=0, h'(0)=1, h(1)=1, h'(1)=0
  const double s = a - level_;
  return std::copysign(level_ + s * (1.0 + s * (1.0 - s)), x);
}

double Cutoff::derivative(double x) const {
  const double a = std::abs(x);
  if (a <= level_) return 1.0;
  if (a >= level_ + 1.0) return 0.0;
  const double s = a - level_;
  return (1.0 - s) * (3.0 * s + 1.0);
}

double eval_cutoff(const Cutoff& c, double x) { return c(x); }

// ---------------------------------------------------------------------------

ReactionNetwork ReactionNetwork::none() {
  const Fn4 zero = [](double, double, double, double) { return 0.0; };
  return custom(CustomReactions{{zero, zero, zero, zero}});
}

ReactionValues eval_reactions(const ReactionNetwork& net, double u, double v, double p, double w) {
  if (!finite4(u, v, p, w)) throw EvaluationError("non-finite argument to reaction terms");
  if (net.cutoff) {
    v = (*net.cutoff)(v);
    p = (*net.cutoff)(p);
    w = (*net.cutoff)(w);
  }
  const ReactionValues r = std::visit(
      Overloaded{
          [&](const KineticParams& k) -> ReactionValues {
            const double bind = k.r1 * v * p;
            return {0.0, -bind + k.r_neg1 * w + u * k.f(v), -bind + (k.r_neg1 + k.r2) * w + u * k.g(v, p),
                    bind - (k.r_neg1 + k.r2) * w};
          },
          [&](const SimplifiedParams& s) -> ReactionValues {
            return {0.0, -s.k(v) * v + u * s.f(v), 0.0, 0.0};
          },
          [&](const CustomReactions& c) -> ReactionValues {
            return {c.terms[0](u, v, p, w), c.terms[1](u, v, p, w), c.terms[2](u, v, p, w),
                    c.terms[3](u, v, p, w)};
          }},
      net.kind);
  if (!finite4(r[0], r[1], r[2], r[3])) throw EvaluationError("reaction term evaluated to a non-finite value");
  return r;
}

QuasipositivityReport check_quasipositivity(const ReactionNetwork& net, const SampleBox& box,
                                            int samples) {
  const auto nonneg = [](Interval iv) { return Interval{std::max(iv.lo, 0.0), std::max(iv.hi, 0.0)}; };
  const auto us = grid(box.u, samples);
  const auto vs = grid(nonneg(box.v), samples);
  const auto ps = grid(nonneg(box.p), samples);
  const auto ws = grid(nonneg(box.w), samples);
  QuasipositivityReport report;
  const auto check = [&](int species, std::array<double, 4> x) {
    const double value = eval_reactions(net, x[0], x[1], x[2], x[3])[static_cast<std::size_t>(species - 1)];
    if (value < 0.0) {
      report.ok = false;
      report.witness = QuasipositivityWitness{species, x, value};
      return false;
    }
    return true;
  };
  for (const double u : us) {
    for (const double a : vs) {
      for (const double b : ps) {
        for (const double c : ws) {
          // (a, b, c) ranges over the nonnegative box; one slot is forced to zero per test.
          if (!check(2, {u, 0.0, b, c})) return report;
          if (!check(3, {u, a, 0.0, c})) return report;
          if (!check(4, {u, a, b, 0.0})) return report;
        }
      }
    }
  }
  return report;
}

std::array<double, 4> sup_abs_reactions(const ReactionNetwork& net, const SampleBox& box, int samples) {
  std::array<double, 4> sup{};
  for (const double u : grid(box.u, samples)) {
    for (const double v : grid(box.v, samples)) {
      for (const double p : grid(box.p, samples)) {
        for (const double w : grid(box.w, samples)) {
          const auto r = eval_reactions(net, u, v, p, w);
          for (std::size_t i = 0; i < 4; ++i) sup[i] = std::max(sup[i], std::abs(r[i]));
        }
      }
    }
  }
  return sup;
}

// ---------------------------------------------------------------------------

CoefficientPair CoefficientPair::classical(double chi, double kappa_floor) {
  return {[](double, double) { return 1.0; }, [chi](double u, double) { return -chi * u; }, kappa_floor,
          true};
}

CoefficientPair CoefficientPair::pure_diffusion(double kappa, double kappa_floor) {
  return {[kappa](double, double) { return kappa; }, [](double, double) { return 0.0; }, kappa_floor,
          true};
}

Coefficients eval_coefficients(const CoefficientPair& cp, double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v)) throw EvaluationError("non-finite argument to coefficients");
  const Coefficients c{cp.kappa(u, v), cp.sigma(u, v)};
  if (!std::isfinite(c.kappa) || !std::isfinite(c.sigma)) {
    throw EvaluationError("coefficient evaluated to a non-finite value");
  }
  if (cp.builtin && c.kappa < cp.kappa_floor) {
    throw std::logic_error("built-in diffusion coefficient fell below its floor");
  }
  return c;
}

}  // namespace kschemo
