#pragma once

#include "kschemo/operator.hpp"

namespace kschemo {

/// The quadruple (u, v, p, w) at time t, all on one mesh.
struct SimState {
  double t = 0.0;
  ScalarField u;
  ScalarField v;
  ScalarField p;
  ScalarField w;

  /// All fields zero at t = 0.
  static SimState zeros(const TriMesh& mesh) {
    return {0.0, ScalarField(mesh), ScalarField(mesh), ScalarField(mesh), ScalarField(mesh)};
  }

  bool all_finite() const { return u.all_finite() && v.all_finite() && p.all_finite() && w.all_finite(); }
  bool shares_mesh() const { return u.same_mesh(v) && u.same_mesh(p) && u.same_mesh(w); }

  friend bool operator==(const SimState&, const SimState&) = default;
};

}  // namespace kschemo
