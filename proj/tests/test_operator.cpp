#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kschemo/error.hpp"
#include "kschemo/kernels.hpp"
#include "kschemo/operator.hpp"
#include "support.hpp"

using namespace kschemo;

namespace {

TriMesh reference_triangle() { return TriMesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{0, 1, 2}}); }

struct Local {
  double k[3][3];
  double m[3][3];
};

// Element matrices from the inverse Jacobian and an edge-midpoint rule, which
// integrates quadratics exactly.
Local element_oracle(const std::array<Point, 3>& x, const std::array<double, 3>& mu) {
  const double j11 = x[1].x - x[0].x, j12 = x[2].x - x[0].x;
  const double j21 = x[1].y - x[0].y, j22 = x[2].y - x[0].y;
  const double det = j11 * j22 - j12 * j21;
  const double area = 0.5 * std::abs(det);
  // Rows of J^{-T}: gradients of the reference hat functions 1 and 2.
  const Point g1{j22 / det, -j12 / det};
  const Point g2{-j21 / det, j11 / det};
  const Point g[3] = {{-g1.x - g2.x, -g1.y - g2.y}, g1, g2};
  const double mid_mu[3] = {0.5 * (mu[0] + mu[1]), 0.5 * (mu[1] + mu[2]), 0.5 * (mu[2] + mu[0])};
  // phi_i at the midpoints of edges (01), (12), (20)
  const double phi[3][3] = {{0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}};
  Local out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double mu_int = 0.0, mass = 0.0;
      for (int q = 0; q < 3; ++q) {
        mu_int += area / 3.0 * mid_mu[q];
        mass += area / 3.0 * phi[i][q] * phi[j][q];
      }
      out.k[i][j] = mu_int * dot(g[i], g[j]);
      out.m[i][j] = mass;
    }
  }
  return out;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

}  // namespace

TEST(ScalarField, LengthMustMatch) {
  const auto m = testing_support::square_mesh(0.5);
  EXPECT_THROW(ScalarField(m, std::vector<double>(3)), DimensionError);
  const ScalarField f(m, 2.0);
  EXPECT_EQ(f.size(), m.node_count());
  EXPECT_TRUE(f.all_finite());
  ScalarField g = f;
  g[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(g.all_finite());
}

TEST(LocalMatrices, ReferenceTriangle) {
  const auto m = reference_triangle();
  const auto k = assemble_stiffness(m, ScalarField(m, 1.0));
  const double expect_k[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  const auto mass = assemble_mass(m, false);
  const auto lumped = assemble_mass(m, true);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(k.entry(i, j), expect_k[i][j], 1e-14);
      EXPECT_NEAR(mass.entry(i, j), i == j ? 1.0 / 12.0 : 1.0 / 24.0, 1e-14);
      EXPECT_NEAR(lumped.entry(i, j), i == j ? 1.0 / 6.0 : 0.0, 1e-14);
    }
  }
}

TEST(LocalMatrices, ScaledCoefficient) {
  const auto m = reference_triangle();
  const auto k = assemble_stiffness(m, ScalarField(m, 2.5));
  EXPECT_NEAR(k.entry(0, 0), 2.5, 1e-14);
  EXPECT_NEAR(k.entry(1, 2), 0.0, 1e-14);
}

TEST(LocalMatrices, MatchesOracleOnRandomTriangles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-1.0, 1.0), pos(0.5, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<Point, 3> x{Point{c(rng), c(rng)}, Point{c(rng), c(rng)}, Point{c(rng), c(rng)}};
    if (cross(x[1] - x[0], x[2] - x[0]) < 0) std::swap(x[1], x[2]);
    if (std::abs(cross(x[1] - x[0], x[2] - x[0])) < 1e-2) continue;
    const std::array<double, 3> mu{pos(rng), pos(rng), pos(rng)};
    const TriMesh m({x[0], x[1], x[2]}, {Triangle{0, 1, 2}});
    const auto k = assemble_stiffness(m, ScalarField(m, std::vector<double>(mu.begin(), mu.end())));
    const auto mm = assemble_mass(m, false);
    const auto oracle = element_oracle(x, mu);
    const double scale = k.max_abs();
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_NEAR(k.entry(i, j), oracle.k[i][j], 1e-12 * scale);
        EXPECT_NEAR(mm.entry(i, j), oracle.m[i][j], 1e-15);
      }
    }
  }
}

TEST(Assembly, StructuralProperties) {
  const auto mesh = testing_support::l_mesh(0.07);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const ScalarField mu(mesh, random_vector(mesh.node_count(), rng, 0.5, 2.0));
    const auto k = assemble_stiffness(mesh, mu);
    EXPECT_TRUE(k.is_symmetric());
    EXPECT_LE(k.max_row_sum(), 1e-12 * k.max_abs());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) EXPECT_GT(k.entry(i, i), 0.0);
    // Nonobtuse mesh: nonpositive off-diagonals.
    const auto& pat = k.pattern();
    for (std::size_t i = 0; i < pat.dimension(); ++i) {
      for (std::size_t s = pat.row_ptr()[i]; s < pat.row_ptr()[i + 1]; ++s) {
        if (static_cast<std::size_t>(pat.cols()[s]) != i) EXPECT_LE(k.values()[s], 1e-15);
      }
    }
  }
}

TEST(Assembly, EnergyOfLinearFunction) {
  const auto mesh = testing_support::l_mesh(0.1);
  const double a = 0.7, b = -1.3;
  std::vector<double> x(mesh.node_count());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * mesh.nodes()[i].x + b * mesh.nodes()[i].y + 0.2;
  const auto k = assemble_stiffness(mesh, ScalarField(mesh, 3.0));
  const auto kx = kschemo::apply(k, x);
  double energy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) energy += x[i] * kx[i];
  EXPECT_NEAR(energy, 3.0 * (a * a + b * b) * 0.75, 1e-12);
}

TEST(Assembly, MassIntegratesLinearFunctions) {
  const auto mesh = testing_support::square_mesh(0.1);
  for (const bool lumped : {false, true}) {
    const auto m = assemble_mass(mesh, lumped);
    std::vector<double> x(mesh.node_count()), ones(mesh.node_count(), 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mesh.nodes()[i].x;
    const auto mx = kschemo::apply(m, x);
    double integral = 0.0, area = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) integral += mx[i];
    for (const double v : kschemo::apply(m, ones)) area += v;
    EXPECT_NEAR(area, 1.0, 1e-13);
    if (!lumped) EXPECT_NEAR(integral, 0.5, 1e-13);
  }
}

TEST(Assembly, LumpedMassIsRowSumOfConsistent) {
  const auto mesh = testing_support::l_mesh(0.1);
  const auto mc = assemble_mass(mesh, false);
  const auto ml = assemble_mass(mesh, true);
  std::vector<double> ones(mesh.node_count(), 1.0);
  const auto rows = kschemo::apply(mc, ones);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_NEAR(ml.entry(i, i), rows[i], 1e-15);
}

TEST(Assembly, ForeignFieldIsRejected) {
  const auto a = testing_support::square_mesh(0.5);
  const auto b = testing_support::square_mesh(0.5);
  const P1Assembler asm_a(a);
  EXPECT_THROW(asm_a.stiffness(ScalarField(b, 1.0)), DimensionError);
}

TEST(Assembly, CombineRequiresSharedPattern) {
  const auto a = testing_support::square_mesh(0.5);
  const auto b = testing_support::square_mesh(0.5);
  EXPECT_THROW(SparseOperator::combine(1.0, assemble_mass(a, true), 1.0, assemble_mass(b, true)),
               DimensionError);
}

TEST(Backends, AssemblyIsBitIdentical) {
  const auto mesh = testing_support::l_mesh(0.03);
  std::mt19937_64 rng(5);
  const ScalarField mu(mesh, random_vector(mesh.node_count(), rng, -1.0, 2.0));
  const auto ks = assemble_stiffness(mesh, mu, Backend::serial);
  const auto ko = assemble_stiffness(mesh, mu, Backend::openmp);
  EXPECT_TRUE(bit_equal(ks.values(), ko.values()));
}

TEST(Backends, KernelsAgree) {
  const auto mesh = testing_support::l_mesh(0.03);
  const auto k = assemble_stiffness(mesh, ScalarField(mesh, 1.0));
  std::mt19937_64 rng(9);
  const auto x = random_vector(mesh.node_count(), rng, -1.0, 1.0);
  const auto y0 = random_vector(mesh.node_count(), rng, -1.0, 1.0);
  EXPECT_TRUE(bit_equal(kschemo::apply(k, x, Backend::serial), kschemo::apply(k, x, Backend::openmp)));

  auto ys = y0, yo = y0;
  kernels::serial::axpy(0.3, x, ys);
  kernels::omp::axpy(0.3, x, yo);
  EXPECT_TRUE(bit_equal(ys, yo));
  kernels::serial::xpby(x, -0.7, ys);
  kernels::omp::xpby(x, -0.7, yo);
  EXPECT_TRUE(bit_equal(ys, yo));
  std::vector<double> zs(x.size()), zo(x.size());
  kernels::serial::scale(x, y0, zs);
  kernels::omp::scale(x, y0, zo);
  EXPECT_TRUE(bit_equal(zs, zo));

  double exact = 0.0, magnitude = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    exact += static_cast<long double>(x[i]) * y0[i];
    magnitude += std::abs(x[i] * y0[i]);
  }
  EXPECT_NEAR(kernels::serial::dot(x, y0), exact, 1e-13 * magnitude);
  EXPECT_NEAR(kernels::omp::dot(x, y0), exact, 1e-13 * magnitude);
  EXPECT_EQ(kernels::omp::dot(x, y0), kernels::omp::dot(x, y0));
}

TEST(Backends, ShortDotMatchesSerial) {
  const std::vector<double> x{1.0, 2.0, 3.0}, y{4.0, -5.0, 6.0};
  EXPECT_EQ(kernels::omp::dot(x, y), 12.0);
  EXPECT_EQ(kernels::serial::dot(x, y), 12.0);
}

TEST(Solve, ResidualAndSymmetry) {
  const auto mesh = testing_support::l_mesh(0.05);
  const auto system = SparseOperator::combine(1.0, assemble_mass(mesh, true), 0.1,
                                              assemble_stiffness(mesh, ScalarField(mesh, 1.0)));
  std::mt19937_64 rng(2);
  const auto b = random_vector(mesh.node_count(), rng, -1.0, 1.0);
  for (const auto backend : {Backend::serial, Backend::openmp}) {
    SolveOptions opts;
    opts.tol = 1e-12;
    opts.backend = backend;
    const auto r = solve_spd(system, b, opts);
    EXPECT_LE(r.relative_residual, 1e-12);
    EXPECT_GT(r.iterations, 0);
    const auto ax = kschemo::apply(system, r.x);
    double res = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      res += (ax[i] - b[i]) * (ax[i] - b[i]);
      nb += b[i] * b[i];
    }
    EXPECT_LE(std::sqrt(res / nb), 1e-12);
  }
}

TEST(Solve, ZeroRightHandSide) {
  const auto mesh = testing_support::square_mesh(0.2);
  const auto m = assemble_mass(mesh, true);
  const std::vector<double> b(mesh.node_count(), 0.0);
  const auto r = solve_spd(m, b);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(std::all_of(r.x.begin(), r.x.end(), [](double v) { return v == 0.0; }));
}

TEST(Solve, Failures) {
  const auto mesh = testing_support::square_mesh(0.05);
  const auto k = assemble_stiffness(mesh, ScalarField(mesh, 1.0));
  const auto system = SparseOperator::combine(1e-6, assemble_mass(mesh, true), 1.0, k);
  std::vector<double> b(mesh.node_count(), 0.0);
  b[3] = 1.0;
  SolveOptions opts;
  opts.max_iter = 2;
  EXPECT_THROW(solve_spd(system, b, opts), SolverError);

  b[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(solve_spd(system, b), InputError);

  std::vector<double> ones(mesh.node_count(), 1.0);
  const auto negative = SparseOperator::combine(-1.0, assemble_mass(mesh, true), 0.0, k);
  EXPECT_THROW(solve_spd(negative, ones), SolverError);
  EXPECT_THROW(solve_spd(system, std::vector<double>(3, 1.0)), DimensionError);
}

TEST(Solve, ImplicitEulerIsPositiveAndContractive) {
  const auto mesh = testing_support::square_mesh(0.1);
  ASSERT_TRUE(mesh.is_nonobtuse());
  std::mt19937_64 rng(17);
  const P1Assembler assembler(mesh);
  const auto ml = assembler.mass(true);
  for (int trial = 0; trial < 50; ++trial) {
    const ScalarField mu(mesh, random_vector(mesh.node_count(), rng, 0.5, 2.0));
    const auto system = SparseOperator::combine(1.0, ml, 0.01, assembler.stiffness(mu));
    auto x = random_vector(mesh.node_count(), rng, 0.0, 1.0);
    const double in_sup = *std::max_element(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= assembler.lumped_weights()[i];
    SolveOptions opts;
    opts.tol = 1e-14;
    const auto out = solve_spd(system, x, opts).x;
    EXPECT_GE(*std::min_element(out.begin(), out.end()), -1e-12);
    EXPECT_LE(*std::max_element(out.begin(), out.end()), in_sup + 1e-12);
  }
}
