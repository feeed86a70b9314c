#pragma once

#include <vector>

#include "kschemo/mesh.hpp"
#include "kschemo/operator.hpp"
#include "kschemo/reactions.hpp"
#include "kschemo/state.hpp"

namespace kschemo {

/// Integral of the P1 interpolant of f (1^T M f with consistent M).
double total_mass(const ScalarField& f, const TriMesh& mesh);

struct Extrema {
  double min = 0.0;
  double max = 0.0;
};

/// Nodal extrema, which are the extrema of the P1 interpolant.
/// Throws InputError on non-finite entries.
Extrema field_extrema(const ScalarField& f);

/// Sup-norm over nodes.
double sup_norm(const ScalarField& f);

struct CornerMass {
  double inside = 0.0;   // sum of m_i |f_i| over nodes with |x_i - corner| <= radius
  double outside = 0.0;  // the rest
  /// inside / (inside + outside); 0 when both vanish.
  double fraction() const;
};

CornerMass corner_mass(const ScalarField& f, const TriMesh& mesh, Point corner, double radius);

/// Share of the lumped-mass weighted integral of |f| carried by nodes in the
/// closed ball B(corner, radius). In [0, 1]; 0 when no node lies in the ball.
double corner_mass_fraction(const ScalarField& f, const TriMesh& mesh, Point corner, double radius);

/// M - max(|v|_inf, |p|_inf, |w|_inf), evaluated as
/// delta + (initial sup - current sup) so that it is exactly delta at t = 0.
double boundedness_margin(const SimState& state, const Cutoff& clamp);

struct DiagRecord {
  long step = 0;
  double t = 0.0;
  double tau = 0.0;
  double mass_u = 0.0;
  double mass_p_plus_w = 0.0;
  Extrema u, v, p, w;
  double corner_fraction = 0.0;
  double margin = 0.0;
  bool clamp_active = false;
  bool picard_converged = true;
};

/// Per-step observables on one mesh. Caches the lumped weights and the corner ball.
class Diagnostics {
 public:
  Diagnostics(const TriMesh& mesh, Point corner, double radius);

  DiagRecord record(long step, double tau, const SimState& state, const Cutoff& clamp,
                    bool picard_converged) const;

  const TriMesh& mesh() const { return *mesh_; }
  Point corner() const { return corner_; }
  double radius() const { return radius_; }

 private:
  const TriMesh* mesh_;
  Point corner_;
  double radius_;
  std::vector<double> weights_;
  std::vector<char> in_ball_;
};

}  // namespace kschemo
