#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP version. Both produce bit-identical results except
// `dot`, whose OpenMP variant sums fixed-size blocks in a fixed order (so it is
// deterministic for any thread count, but rounds differently from the serial
// loop).

#include <cstddef>
#include <cstdint>
#include <span>

namespace kschemo {

enum class Backend { serial, openmp };

namespace kernels {

/// Read-only view of a compressed-sparse-row matrix.
struct CsrView {
  std::span<const std::size_t> row_ptr;
  std::span<const std::int32_t> cols;
  std::span<const double> values;
};

/// Block length of the deterministic parallel reduction.
inline constexpr std::size_t kDotBlock = 2048;

namespace serial {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// z = d .* r
void scale(std::span<const double> d, std::span<const double> r, std::span<double> z);
/// values[slots[c]] += local[c] for c in order; values is zeroed first.
void scatter_add(std::span<const double> local, std::span<const std::size_t> slots,
                 std::span<double> values);

}  // namespace serial

namespace omp {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void scale(std::span<const double> d, std::span<const double> r, std::span<double> z);
/// values[p] = sum of local[contrib[k]] for k in [contrib_ptr[p], contrib_ptr[p+1]),
/// contributions listed in ascending order so the sum matches serial::scatter_add.
void gather_sum(std::span<const double> local, std::span<const std::size_t> contrib_ptr,
                std::span<const std::size_t> contrib, std::span<double> values);

}  // namespace omp

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

}  // namespace kernels
}  // namespace kschemo
