#include "kschemo/operator.hpp"

#include <algorithm>
#include <cmath>

#include "kschemo/error.hpp"

namespace kschemo {

namespace {

using Index = std::ptrdiff_t;

void require_same_pattern(const SparseOperator& a, const SparseOperator& b) {
  if (&a.pattern() != &b.pattern() && a.pattern().mesh_id() != b.pattern().mesh_id()) {
    throw DimensionError("operators live on different meshes");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const TriMesh& mesh, double value)
    : mesh_id_(mesh.id()), values_(mesh.node_count(), value) {}

ScalarField::ScalarField(const TriMesh& mesh, std::vector<double> values)
    : mesh_id_(mesh.id()), values_(std::move(values)) {
  if (values_.size() != mesh.node_count()) {
    throw DimensionError("field has " + std::to_string(values_.size()) + " values, mesh has " +
                         std::to_string(mesh.node_count()) + " nodes");
  }
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------

SparsityPattern::SparsityPattern(const TriMesh& mesh) : mesh_id_(mesh.id()) {
  const std::size_t n = mesh.node_count();
  std::vector<std::vector<std::int32_t>> adj(n);
  for (const auto& tr : mesh.triangles()) {
    for (const auto a : tr) {
      for (const auto b : tr) adj[static_cast<std::size_t>(a)].push_back(b);
    }
  }
  row_ptr_.assign(n + 1, 0);
  diag_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    row_ptr_[i + 1] = row_ptr_[i] + row.size();
  }
  cols_.reserve(row_ptr_[n]);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto j : adj[i]) {
      if (static_cast<std::size_t>(j) == i) diag_[i] = cols_.size();
      cols_.push_back(j);
    }
  }

  const auto& tris = mesh.triangles();
  slots_.resize(9 * tris.size());
  for (std::size_t e = 0; e < tris.size(); ++e) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        slots_[9 * e + 3 * a + b] =
            find(static_cast<std::size_t>(tris[e][a]), static_cast<std::size_t>(tris[e][b]));
      }
    }
  }
  contrib_ptr_.assign(cols_.size() + 1, 0);
  for (const auto s : slots_) ++contrib_ptr_[s + 1];
  for (std::size_t p = 0; p < cols_.size(); ++p) contrib_ptr_[p + 1] += contrib_ptr_[p];
  contrib_.resize(slots_.size());
  std::vector<std::size_t> fill(contrib_ptr_.begin(), contrib_ptr_.end() - 1);
  for (std::size_t c = 0; c < slots_.size(); ++c) contrib_[fill[slots_[c]]++] = c;
}

std::size_t SparsityPattern::find(std::size_t i, std::size_t j) const {
  const auto first = cols_.begin() + static_cast<Index>(row_ptr_[i]);
  const auto last = cols_.begin() + static_cast<Index>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(j));
  if (it == last || *it != static_cast<std::int32_t>(j)) return npos;
  return static_cast<std::size_t>(it - cols_.begin());
}

// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(std::shared_ptr<const SparsityPattern> pattern,
                               std::vector<double> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (values_.size() != pattern_->nonzeros()) {
    throw DimensionError("operator values do not match the sparsity pattern");
  }
}

double SparseOperator::entry(std::size_t i, std::size_t j) const {
  if (i >= dimension() || j >= dimension()) throw DimensionError("operator index out of range");
  const std::size_t p = pattern_->find(i, j);
  return p == SparsityPattern::npos ? 0.0 : values_[p];
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (const double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseOperator::asymmetry() const {
  double m = 0.0;
  const auto rp = pattern_->row_ptr();
  const auto cols = pattern_->cols();
  for (std::size_t i = 0; i < dimension(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(cols[k]);
      m = std::max(m, std::abs(values_[k] - entry(j, i)));
    }
  }
  return m;
}

bool SparseOperator::is_symmetric() const { return asymmetry() <= 1e-14 * max_abs(); }

double SparseOperator::max_row_sum() const {
  double m = 0.0;
  const auto rp = pattern_->row_ptr();
  for (std::size_t i = 0; i < dimension(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += values_[k];
    m = std::max(m, std::abs(s));
  }
  return m;
}

SparseOperator SparseOperator::combine(double a, const SparseOperator& A, double b,
                                       const SparseOperator& B) {
  require_same_pattern(A, B);
  std::vector<double> v(A.values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * A.values_[k] + b * B.values_[k];
  return SparseOperator(A.pattern_, std::move(v));
}

// ---------------------------------------------------------------------------

P1Assembler::P1Assembler(const TriMesh& mesh, Backend backend)
    : mesh_id_(mesh.id()),
      backend_(backend),
      pattern_(std::make_shared<const SparsityPattern>(mesh)),
      triangles_(mesh.triangles()),
      lumped_(mesh.node_count(), 0.0) {
  const auto& nodes = mesh.nodes();
  area_.resize(triangles_.size());
  grad_dot_.resize(triangles_.size());
  for (std::size_t e = 0; e < triangles_.size(); ++e) {
    const auto& tr = triangles_[e];
    std::array<Point, 3> p{};
    for (std::size_t k = 0; k < 3; ++k) p[k] = nodes[static_cast<std::size_t>(tr[k])];
    const double area = mesh.signed_area(e);
    // grad(phi_k) = (b_k, c_k) / (2 area)
    std::array<double, 3> b{}, c{};
    for (std::size_t k = 0; k < 3; ++k) {
      const Point pj = p[(k + 1) % 3];
      const Point pk = p[(k + 2) % 3];
      b[k] = pj.y - pk.y;
      c[k] = pk.x - pj.x;
    }
    const double inv = 1.0 / (4.0 * area);
    area_[e] = area;
    grad_dot_[e] = {(b[0] * b[1] + c[0] * c[1]) * inv, (b[1] * b[2] + c[1] * c[2]) * inv,
                    (b[2] * b[0] + c[2] * c[0]) * inv};
    for (const auto k : tr) lumped_[static_cast<std::size_t>(k)] += area / 3.0;
  }
}

SparseOperator P1Assembler::finish(std::vector<double> local) const {
  std::vector<double> values(pattern_->nonzeros());
  if (backend_ == Backend::serial) {
    kernels::serial::scatter_add(local, pattern_->element_slots(), values);
  } else {
    kernels::omp::gather_sum(local, pattern_->contrib_ptr(), pattern_->contrib(), values);
  }
  return SparseOperator(pattern_, std::move(values));
}

SparseOperator P1Assembler::stiffness(const ScalarField& mu) const {
  if (mu.mesh_id() != mesh_id_ || mu.size() != node_count()) {
    throw DimensionError("coefficient field does not belong to the assembler's mesh");
  }
  return stiffness_nodal(mu.values());
}

SparseOperator P1Assembler::stiffness_nodal(std::span<const double> mu) const {
  std::vector<double> local(9 * triangles_.size());
  const auto element = [&](std::size_t e) {
    const auto& tr = triangles_[e];
    const double avg = (mu[static_cast<std::size_t>(tr[0])] + mu[static_cast<std::size_t>(tr[1])] +
                        mu[static_cast<std::size_t>(tr[2])]) /
                       3.0;
    const auto& g = grad_dot_[e];
    const double k01 = avg * g[0], k12 = avg * g[1], k20 = avg * g[2];
    double* out = &local[9 * e];
    out[0] = -(k01 + k20);
    out[1] = k01;
    out[2] = k20;
    out[3] = k01;
    out[4] = -(k01 + k12);
    out[5] = k12;
    out[6] = k20;
    out[7] = k12;
    out[8] = -(k12 + k20);
  };
  if (backend_ == Backend::serial) {
    for (std::size_t e = 0; e < triangles_.size(); ++e) element(e);
  } else {
#pragma omp parallel for schedule(static)
    for (Index e = 0; e < static_cast<Index>(triangles_.size()); ++e) element(static_cast<std::size_t>(e));
  }
  return finish(std::move(local));
}

SparseOperator P1Assembler::stiffness(double mu) const {
  const std::vector<double> values(node_count(), mu);
  return stiffness_nodal(values);
}

SparseOperator P1Assembler::mass(bool lumped) const {
  std::vector<double> local(9 * triangles_.size());
  for (std::size_t e = 0; e < triangles_.size(); ++e) {
    const double a = area_[e];
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double v;
        if (lumped) {
          v = i == j ? a / 3.0 : 0.0;
        } else {
          v = i == j ? a / 6.0 : a / 12.0;
        }
        local[9 * e + 3 * i + j] = v;
      }
    }
  }
  return finish(std::move(local));
}

SparseOperator assemble_stiffness(const TriMesh& mesh, const ScalarField& mu, Backend backend) {
  if (mu.mesh_id() != mesh.id() || mu.size() != mesh.node_count()) {
    throw DimensionError("coefficient field does not match the mesh");
  }
  return P1Assembler(mesh, backend).stiffness(mu);
}

SparseOperator assemble_mass(const TriMesh& mesh, bool lumped) {
  return P1Assembler(mesh, Backend::serial).mass(lumped);
}

std::vector<double> apply(const SparseOperator& a, std::span<const double> x, Backend backend) {
  if (x.size() != a.dimension()) {
    throw DimensionError("vector of length " + std::to_string(x.size()) +
                         " applied to operator of dimension " + std::to_string(a.dimension()));
  }
  std::vector<double> y(x.size());
  if (backend == Backend::serial) {
    kernels::serial::spmv(a.view(), x, y);
  } else {
    kernels::omp::spmv(a.view(), x, y);
  }
  return y;
}

// ---------------------------------------------------------------------------

namespace {

struct Ops {
  Backend backend;
  void spmv(const kernels::CsrView& a, std::span<const double> x, std::span<double> y) const {
    backend == Backend::serial ? kernels::serial::spmv(a, x, y) : kernels::omp::spmv(a, x, y);
  }
  double dot(std::span<const double> x, std::span<const double> y) const {
    return backend == Backend::serial ? kernels::serial::dot(x, y) : kernels::omp::dot(x, y);
  }
  void axpy(double alpha, std::span<const double> x, std::span<double> y) const {
    backend == Backend::serial ? kernels::serial::axpy(alpha, x, y) : kernels::omp::axpy(alpha, x, y);
  }
  void xpby(std::span<const double> x, double beta, std::span<double> y) const {
    backend == Backend::serial ? kernels::serial::xpby(x, beta, y) : kernels::omp::xpby(x, beta, y);
  }
  void scale(std::span<const double> d, std::span<const double> r, std::span<double> z) const {
    backend == Backend::serial ? kernels::serial::scale(d, r, z) : kernels::omp::scale(d, r, z);
  }
};

}  // namespace

SolveResult solve_spd(const SparseOperator& a, std::span<const double> b, const SolveOptions& options,
                      std::span<const double> guess) {
  const std::size_t n = a.dimension();
  if (b.size() != n) throw DimensionError("right-hand side does not match operator dimension");
  if (!guess.empty() && guess.size() != n) throw DimensionError("initial guess has wrong length");
  if (!std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); })) {
    throw InputError("right-hand side contains non-finite entries");
  }
  const Ops ops{options.backend};
  SolveResult result;
  result.x.assign(n, 0.0);
  const double bnorm = std::sqrt(ops.dot(b, b));
  if (bnorm == 0.0) return result;

  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.values()[a.pattern().diagonal(i)];
    if (!(d > 0.0)) throw SolverError("operator has a non-positive diagonal entry", 1.0, 0);
    inv_diag[i] = 1.0 / d;
  }

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> ap(n);
  if (!guess.empty() &&
      std::all_of(guess.begin(), guess.end(), [](double v) { return std::isfinite(v); })) {
    result.x.assign(guess.begin(), guess.end());
    ops.spmv(a.view(), result.x, ap);
    ops.axpy(-1.0, ap, r);
  }
  const double target = options.tol * bnorm;
  std::vector<double> z(n), p(n);
  ops.scale(inv_diag, r, z);
  p = z;
  double rz = ops.dot(r, z);
  double rnorm = std::sqrt(ops.dot(r, r));

  for (int it = 0;; ++it) {
    if (rnorm <= target) {
      // Confirm against the true residual; the recurrence can drift.
      ops.spmv(a.view(), result.x, ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
      rnorm = std::sqrt(ops.dot(r, r));
      if (rnorm <= target) {
        result.iterations = it;
        result.relative_residual = rnorm / bnorm;
        return result;
      }
      ops.scale(inv_diag, r, z);
      p = z;
      rz = ops.dot(r, z);
    }
    if (it >= options.max_iter) {
      throw SolverError("conjugate gradients did not converge in " + std::to_string(options.max_iter) +
                            " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")",
                        rnorm / bnorm, it);
    }
    ops.spmv(a.view(), p, ap);
    const double pap = ops.dot(p, ap);
    if (!(pap > 0.0) || !std::isfinite(pap)) {
      throw SolverError("conjugate gradients broke down: operator is not positive definite",
                        rnorm / bnorm, it);
    }
    const double alpha = rz / pap;
    ops.axpy(alpha, p, result.x);
    ops.axpy(-alpha, ap, r);
    ops.scale(inv_diag, r, z);
    const double rz_next = ops.dot(r, z);
    ops.xpby(z, rz_next / rz, p);
    rz = rz_next;
    rnorm = std::sqrt(ops.dot(r, r));
  }
}

}  // namespace kschemo
