#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kschemo/kernels.hpp"
#include "kschemo/mesh.hpp"

namespace kschemo {

/// Nodal P1 values tied to one mesh.
class ScalarField {
 public:
  ScalarField(const TriMesh& mesh, double value = 0.0);
  /// Throws DimensionError unless `values.size() == mesh.node_count()`.
  ScalarField(const TriMesh& mesh, std::vector<double> values);

  std::uint64_t mesh_id() const { return mesh_id_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  bool all_finite() const;
  bool same_mesh(const ScalarField& other) const { return mesh_id_ == other.mesh_id_; }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  std::uint64_t mesh_id_;
  std::vector<double> values_;
};

/// P1 sparsity of a mesh plus the maps used to assemble element blocks into it.
class SparsityPattern {
 public:
  explicit SparsityPattern(const TriMesh& mesh);

  std::size_t dimension() const { return row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return cols_.size(); }
  std::uint64_t mesh_id() const { return mesh_id_; }
  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> cols() const { return cols_; }
  /// CSR position of (i, j), or npos when the entry is structurally zero.
  std::size_t find(std::size_t i, std::size_t j) const;
  std::size_t diagonal(std::size_t i) const { return diag_[i]; }

  /// For element e and local pair (a, b): CSR slot of entry 9*e + 3*a + b.
  std::span<const std::size_t> element_slots() const { return slots_; }
  /// Inverse of element_slots, grouped per CSR slot in ascending element order.
  std::span<const std::size_t> contrib_ptr() const { return contrib_ptr_; }
  std::span<const std::size_t> contrib() const { return contrib_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::uint64_t mesh_id_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<std::size_t> diag_;
  std::vector<std::size_t> slots_;
  std::vector<std::size_t> contrib_ptr_;
  std::vector<std::size_t> contrib_;
};

/// Symmetric sparse matrix stored on a mesh's full P1 pattern.
class SparseOperator {
 public:
  SparseOperator(std::shared_ptr<const SparsityPattern> pattern, std::vector<double> values);

  std::size_t dimension() const { return pattern_->dimension(); }
  const SparsityPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const SparsityPattern>& shared_pattern() const { return pattern_; }
  std::span<const double> values() const { return values_; }
  kernels::CsrView view() const { return {pattern_->row_ptr(), pattern_->cols(), values_}; }

  double entry(std::size_t i, std::size_t j) const;
  double max_abs() const;
  /// max |A(i,j) - A(j,i)|
  double asymmetry() const;
  /// asymmetry() <= 1e-14 * max_abs()
  bool is_symmetric() const;
  /// Largest |row sum| over all rows.
  double max_row_sum() const;

  /// a*A + b*B on a shared pattern.
  static SparseOperator combine(double a, const SparseOperator& A, double b, const SparseOperator& B);

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<double> values_;
};

/// Assembles P1 operators on one mesh. Element geometry and the sparsity
/// pattern are computed once; every assembly reuses them.
class P1Assembler {
 public:
  explicit P1Assembler(const TriMesh& mesh, Backend backend = Backend::openmp);

  /// Entry (i, j) = integral of mu_h grad(phi_i) . grad(phi_j), mu_h the P1
  /// interpolant of `mu`; exact because mu_h is linear on each element and
  /// the gradients are constant. No sign is assumed for mu.
  SparseOperator stiffness(const ScalarField& mu) const;
  SparseOperator stiffness(double mu) const;
  SparseOperator mass(bool lumped) const;

  const std::shared_ptr<const SparsityPattern>& pattern() const { return pattern_; }
  std::uint64_t mesh_id() const { return mesh_id_; }
  std::size_t node_count() const { return pattern_->dimension(); }
  /// Lumped mass diagonal: area/3 from each adjacent element.
  const std::vector<double>& lumped_weights() const { return lumped_; }
  Backend backend() const { return backend_; }

 private:
  SparseOperator stiffness_nodal(std::span<const double> mu) const;
  SparseOperator finish(std::vector<double> local) const;

  std::uint64_t mesh_id_;
  Backend backend_;
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<Triangle> triangles_;
  std::vector<double> area_;
  std::vector<std::array<double, 3>> grad_dot_;  // (01, 12, 20) entries of grad.grad * area
  std::vector<double> lumped_;
};

SparseOperator assemble_stiffness(const TriMesh& mesh, const ScalarField& mu,
                                  Backend backend = Backend::openmp);
SparseOperator assemble_mass(const TriMesh& mesh, bool lumped);

std::vector<double> apply(const SparseOperator& a, std::span<const double> x,
                          Backend backend = Backend::openmp);
inline std::vector<double> apply(const SparseOperator& a, const std::vector<double>& x,
                                 Backend backend = Backend::openmp) {
  return apply(a, std::span<const double>(x), backend);
}

struct SolveOptions {
  double tol = 1e-10;  // relative residual ||Ax - b|| <= tol ||b||
  int max_iter = 10000;
  Backend backend = Backend::openmp;
};

struct SolveResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. `guess` may be empty (zero start).
/// Throws InputError on non-finite `b`, SolverError on breakdown or when
/// max_iter is exhausted.
SolveResult solve_spd(const SparseOperator& a, std::span<const double> b,
                      const SolveOptions& options = {}, std::span<const double> guess = {});

}  // namespace kschemo
