#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "kschemo/kernels.hpp"
#include "kschemo/mesh.hpp"
#include "kschemo/operator.hpp"

using namespace kschemo;

namespace {

// Range argument n gives h = 1/n on the L-shape.
const TriMesh& mesh_for(int n) {
  static std::vector<std::pair<int, TriMesh>> cache;
  for (const auto& [k, m] : cache) {
    if (k == n) return m;
  }
  MeshOptions opts;
  opts.h_target = 1.0 / n;
  cache.emplace_back(n, triangulate(make_domain(DomainPreset::l_shape), opts).mesh);
  return cache.back().second;
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.5, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <Backend B>
void BM_Spmv(benchmark::State& state) {
  const auto& mesh = mesh_for(static_cast<int>(state.range(0)));
  const auto k = assemble_stiffness(mesh, ScalarField(mesh, 1.0));
  const auto x = random_vector(mesh.node_count(), 1);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    if constexpr (B == Backend::serial) {
      kernels::serial::spmv(k.view(), x, y);
    } else {
      kernels::omp::spmv(k.view(), x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["nodes"] = static_cast<double>(mesh.node_count());
}

template <Backend B>
void BM_Dot(benchmark::State& state) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)), 1);
  const auto y = random_vector(x.size(), 2);
  for (auto _ : state) {
    double d = B == Backend::serial ? kernels::serial::dot(x, y) : kernels::omp::dot(x, y);
    benchmark::DoNotOptimize(d);
  }
}

template <Backend B>
void BM_Assembly(benchmark::State& state) {
  const auto& mesh = mesh_for(static_cast<int>(state.range(0)));
  const P1Assembler assembler(mesh, B);
  const ScalarField mu(mesh, random_vector(mesh.node_count(), 3));
  for (auto _ : state) {
    auto k = assembler.stiffness(mu);
    benchmark::DoNotOptimize(k.values().data());
  }
  state.counters["nodes"] = static_cast<double>(mesh.node_count());
}

template <Backend B>
void BM_Solve(benchmark::State& state) {
  const auto& mesh = mesh_for(static_cast<int>(state.range(0)));
  const P1Assembler assembler(mesh, B);
  const auto system = SparseOperator::combine(1.0, assembler.mass(true), 1e-3, assembler.stiffness(1.0));
  const auto b = random_vector(mesh.node_count(), 4);
  SolveOptions opts;
  opts.tol = 1e-10;
  opts.backend = B;
  for (auto _ : state) {
    auto r = solve_spd(system, b, opts);
    benchmark::DoNotOptimize(r.x.data());
  }
  state.counters["nodes"] = static_cast<double>(mesh.node_count());
}

}  // namespace

BENCHMARK(BM_Spmv<Backend::serial>)->Arg(50)->Arg(200)->Arg(400);
BENCHMARK(BM_Spmv<Backend::openmp>)->Arg(50)->Arg(200)->Arg(400);
BENCHMARK(BM_Dot<Backend::serial>)->Arg(1 << 12)->Arg(1 << 18)->Arg(1 << 21);
BENCHMARK(BM_Dot<Backend::openmp>)->Arg(1 << 12)->Arg(1 << 18)->Arg(1 << 21);
BENCHMARK(BM_Assembly<Backend::serial>)->Arg(50)->Arg(200)->Arg(400);
BENCHMARK(BM_Assembly<Backend::openmp>)->Arg(50)->Arg(200)->Arg(400);
BENCHMARK(BM_Solve<Backend::serial>)->Arg(50)->Arg(200);
BENCHMARK(BM_Solve<Backend::openmp>)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
