#include "kschemo/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kschemo::kernels {

namespace {
using Index = std::ptrdiff_t;
Index ssize(std::size_t n) { return static_cast<Index>(n); }
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = a.row_ptr.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      s += a.values[k] * x[static_cast<std::size_t>(a.cols[k])];
    }
    y[i] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void scale(std::span<const double> d, std::span<const double> r, std::span<double> z) {
  for (std::size_t i = 0; i < d.size(); ++i) z[i] = d[i] * r[i];
}

void scatter_add(std::span<const double> local, std::span<const std::size_t> slots,
                 std::span<double> values) {
  std::fill(values.begin(), values.end(), 0.0);
  for (std::size_t c = 0; c < local.size(); ++c) values[slots[c]] += local[c];
}

}  // namespace serial

namespace omp {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const Index n = ssize(a.row_ptr.size() - 1);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    const auto row = static_cast<std::size_t>(i);
    for (std::size_t k = a.row_ptr[row]; k < a.row_ptr[row + 1]; ++k) {
      s += a.values[k] * x[static_cast<std::size_t>(a.cols[k])];
    }
    y[row] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t blocks = (x.size() + kDotBlock - 1) / kDotBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < ssize(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kDotBlock;
    const std::size_t hi = std::min(x.size(), lo + kDotBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (const double p : partial) s += p;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < ssize(x.size()); ++i) {
    y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
  }
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < ssize(x.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    y[k] = x[k] + beta * y[k];
  }
}

void scale(std::span<const double> d, std::span<const double> r, std::span<double> z) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < ssize(d.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    z[k] = d[k] * r[k];
  }
}

void gather_sum(std::span<const double> local, std::span<const std::size_t> contrib_ptr,
                std::span<const std::size_t> contrib, std::span<double> values) {
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < ssize(values.size()); ++p) {
    const auto k = static_cast<std::size_t>(p);
    double s = 0.0;
    for (std::size_t c = contrib_ptr[k]; c < contrib_ptr[k + 1]; ++c) s += local[contrib[c]];
    values[k] = s;
  }
}

}  // namespace omp
}  // namespace kschemo::kernels
