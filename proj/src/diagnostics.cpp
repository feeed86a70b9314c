#include "kschemo/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "kschemo/error.hpp"

namespace kschemo {

namespace {

void require_on(const ScalarField& f, const TriMesh& mesh) {
  if (f.mesh_id() != mesh.id() || f.size() != mesh.node_count()) {
    throw DimensionError("field does not belong to the mesh");
  }
}

std::vector<double> lumped_weights(const TriMesh& mesh) {
  std::vector<double> w(mesh.node_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const double third = mesh.signed_area(t) / 3.0;
    for (const auto k : mesh.triangles()[t]) w[static_cast<std::size_t>(k)] += third;
  }
  return w;
}

}  // namespace

double total_mass(const ScalarField& f, const TriMesh& mesh) {
  require_on(f, mesh);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tr = mesh.triangles()[t];
    s += mesh.signed_area(t) *
         (f[static_cast<std::size_t>(tr[0])] + f[static_cast<std::size_t>(tr[1])] +
          f[static_cast<std::size_t>(tr[2])]) /
         3.0;
  }
  return s;
}

Extrema field_extrema(const ScalarField& f) {
  if (!f.all_finite()) throw InputError("field contains non-finite values");
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  return {*lo, *hi};
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (const double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double CornerMass::fraction() const {
  const double total = inside + outside;
  return total > 0.0 ? inside / total : 0.0;
}

CornerMass corner_mass(const ScalarField& f, const TriMesh& mesh, Point corner, double radius) {
  require_on(f, mesh);
  const auto w = lumped_weights(mesh);
  CornerMass cm;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const double m = w[i] * std::abs(f[i]);
    (distance(mesh.nodes()[i], corner) <= radius ? cm.inside : cm.outside) += m;
  }
  return cm;
}

double corner_mass_fraction(const ScalarField& f, const TriMesh& mesh, Point corner, double radius) {
  return corner_mass(f, mesh, corner, radius).fraction();
}

double boundedness_margin(const SimState& state, const Cutoff& clamp) {
  const double current = std::max({sup_norm(state.v), sup_norm(state.p), sup_norm(state.w)});
  return clamp.delta() + (clamp.initial_sup() - current);
}

Diagnostics::Diagnostics(const TriMesh& mesh, Point corner, double radius)
    : mesh_(&mesh), corner_(corner), radius_(radius), weights_(lumped_weights(mesh)) {
  in_ball_.resize(mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    in_ball_[i] = distance(mesh.nodes()[i], corner) <= radius ? 1 : 0;
  }
}

DiagRecord Diagnostics::record(long step, double tau, const SimState& state, const Cutoff& clamp,
                               bool picard_converged) const {
  DiagRecord r;
  r.step = step;
  r.t = state.t;
  r.tau = tau;
  r.mass_u = total_mass(state.u, *mesh_);
  r.mass_p_plus_w = total_mass(state.p, *mesh_) + total_mass(state.w, *mesh_);
  r.u = field_extrema(state.u);
  r.v = field_extrema(state.v);
  r.p = field_extrema(state.p);
  r.w = field_extrema(state.w);
  CornerMass cm;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    (in_ball_[i] ? cm.inside : cm.outside) += weights_[i] * std::abs(state.u[i]);
  }
  r.corner_fraction = cm.fraction();
  r.margin = boundedness_margin(state, clamp);
  r.clamp_active = r.margin < 0.0;
  r.picard_converged = picard_converged;
  return r;
}

}  // namespace kschemo
