#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "dunkl/coeff.hpp"
#include "dunkl/solver.hpp"
#include "test_util.hpp"

namespace dunkl {
namespace {

using testing::builtin_systems;
using testing::distance;
using testing::error_code_of;
using testing::Gen;

// Positive root of y^2 - x y - c = 0, in extended precision and a cancellation-free form.
double quadratic_root(double x, double c) {
  const long double lx = x, lc = c;
  const long double disc = std::sqrt(lx * lx + 4.0L * lc);
  return static_cast<double>(lx >= 0 ? (lx + disc) / 2.0L : 2.0L * lc / (disc - lx));
}

// y = x + h k / y on (0, inf).
double bessel_oracle(double x, double h, double k) { return quadratic_root(x, h * k); }

// Two particles: the gap z = y1 - y2 solves z^2 - (x1 - x2) z - 2 h k = 0, the mean is preserved.
Vector a1_oracle(const Vector& x, double h, double k) {
  const double z = quadratic_root(x[0] - x[1], 2.0 * h * k);
  const double m = 0.5 * (x[0] + x[1]);
  return {m + 0.5 * z, m - 0.5 * z};
}

double exact_residual(const RootSystem& rs, const Vector& x, double h, const Vector& y) {
  const Vector f = DriftSpec(rs).fk(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(y[i] - x[i] - h * f[i], 2);
  return std::sqrt(s);
}

TEST(SolveExact, BesselExamples) {
  const auto rs = RootSystem::bessel(1.0);
  const auto r = solve_exact(rs, Vector{1.0}, 0.01);
  EXPECT_NEAR(r.y[0], 1.009901951359278491712128, 1e-15);
  EXPECT_EQ(r.method, SolveMethod::closed_form);
  const auto far = solve_exact(rs, Vector{-10.0}, 0.01);
  EXPECT_NEAR(far.y[0], 0.0009999000199950014, 1e-18);
  EXPECT_GT(far.y[0], 0.0);
}

TEST(SolveExact, TwoParticleExample) {
  const auto r = solve_exact(RootSystem::type_a(2, 1.0), Vector{1.0, 0.0}, 0.01);
  EXPECT_NEAR(r.y[0], 1.009807621135331594, 1e-15);
  EXPECT_NEAR(r.y[1], -0.009807621135331594, 1e-15);
}

TEST(SolveExact, ZeroMultiplicityIsIdentity) {
  const Vector x{0.3, 2.0, -1.0};
  EXPECT_EQ(solve_exact(RootSystem::type_a(3, 0.0), x, 0.5).y, x);
}

TEST(SolveExact, RejectsBadInput) {
  const auto rs = RootSystem::bessel(1.0);
  EXPECT_EQ(error_code_of([&] { solve_exact(rs, Vector{1.0}, 0.0); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(error_code_of([&] { solve_exact(rs, Vector{1.0, 2.0}, 0.1); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(error_code_of([&] { solve_exact(rs, Vector{std::nan("")}, 0.1); }), ErrorCode::invalid_parameter);
}

TEST(SolveTruncated, Examples) {
  const auto bessel = RootSystem::bessel(1.0);
  EXPECT_NEAR(solve_truncated(bessel, Vector{1.0}, 0.01, 0.5, 1e-14).y[0], 1.009901951359278491712128, 1e-14);
  const auto below = solve_truncated(bessel, Vector{-1.0}, 0.01, 0.5);
  EXPECT_NEAR(below.y[0], -0.98, 1e-15);
  const auto a1 = solve_truncated(RootSystem::type_a(2, 1.0), Vector{1.0, 0.0}, 0.01, 0.3);
  EXPECT_NEAR(a1.y[0], 1.009807621135331594, 1e-12);
  EXPECT_NEAR(a1.y[1], -0.009807621135331594, 1e-12);
}

TEST(SolveTruncated, ZeroMultiplicityConvergesInOneIteration) {
  const Vector x{0.25, -3.0};
  const auto r = solve_truncated(RootSystem::type_bcd(2, 0.0, 1), x, 0.4, 0.1);
  EXPECT_EQ(r.y, x);
  EXPECT_EQ(r.iterations, 1);
}

TEST(SolveTruncated, ContractViolation) {
  const auto rs = RootSystem::bessel(1.0);
  EXPECT_EQ(error_code_of([&] { solve_truncated(rs, Vector{1.0}, 0.25, 0.5); }), ErrorCode::contract_violation);
  EXPECT_EQ(error_code_of([&] { solve_truncated(rs, Vector{1.0}, 0.3, 0.5); }), ErrorCode::contract_violation);
  EXPECT_EQ(error_code_of([&] { check_contraction(rs, 0.1, 0.0); }), ErrorCode::invalid_parameter);
  try {
    check_contraction(rs, 0.3, 0.5);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("eps^2/L_k"), std::string::npos);
  }
}

TEST(SolveTruncated, IterationLimitCarriesLastIterate) {
  const auto rs = RootSystem::type_a(3, 1.0);
  try {
    solve_truncated(rs, Vector{1.0, 0.0, -1.0}, 0.01, 0.5, 1e-14, 2);
    FAIL() << "expected a convergence error";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::convergence);
    EXPECT_EQ(e.last_iterate().size(), 3u);
    EXPECT_GT(e.residual(), 1e-14);
  }
}

TEST(IterationBound, Examples) {
  const auto rs = RootSystem::bessel(1.0);
  EXPECT_NEAR(iteration_error_bound(rs, 0.1, 0.5, 0), 0.5 / 0.6, 1e-15);
  EXPECT_NEAR(iteration_error_bound(rs, 0.1, 0.5, 3) / iteration_error_bound(rs, 0.1, 0.5, 2), 0.4, 1e-14);
  EXPECT_LT(iteration_error_bound(rs, 1e-9, 0.5, 1), 1e-8);
  EXPECT_EQ(error_code_of([&] { iteration_error_bound(rs, 0.3, 0.5, 1); }), ErrorCode::contract_violation);
  EXPECT_EQ(error_code_of([&] { iteration_error_bound(rs, 0.1, 0.5, -1); }), ErrorCode::invalid_parameter);
}

TEST(TruncatedIterates, StartAtXAndFollowTheMap) {
  const auto rs = RootSystem::bessel(1.0);
  const auto it = truncated_iterates(rs, Vector{-1.0}, 0.01, 0.5, 2);
  ASSERT_EQ(it.size(), 3u);
  EXPECT_DOUBLE_EQ(it[0][0], -1.0);
  EXPECT_DOUBLE_EQ(it[1][0], -0.98);
  EXPECT_DOUBLE_EQ(it[2][0], -0.98);
}

TEST(SolverProperty, ClosedFormOraclesMatchBothSolvers) {
  Gen gen(31);
  const auto bessel = RootSystem::bessel(1.0);
  const auto a1 = RootSystem::type_a(2, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double h = gen.uniform(1e-4, 0.05);
    const double x = gen.uniform(0.5, 5.0);
    const double y_star = bessel_oracle(x, h, 1.0);
    EXPECT_NEAR(solve_exact(bessel, Vector{x}, h).y[0], y_star, 1e-12);
    const double eps = 0.5 * y_star;
    ASSERT_LT(h, eps * eps);
    EXPECT_NEAR(solve_truncated(bessel, Vector{x}, h, eps).y[0], y_star, 1e-12);

    const Vector xa{gen.uniform(-3, 3), 0.0};
    const Vector pa{xa[0] + gen.uniform(0.5, 4.0), xa[0]};
    const Vector expected = a1_oracle(pa, h, 1.0);
    const auto ex = solve_exact(a1, pa, h);
    EXPECT_LE(distance(ex.y, expected), 1e-12);
    const double eps_a = 0.4;
    ASSERT_LT(h * a1.lipschitz_scale(), eps_a * eps_a);
    EXPECT_LE(distance(solve_truncated(a1, pa, h, eps_a).y, expected), 1e-12);
  }
}

TEST(SolverProperty, ExactSolutionsStayInChamberWithSmallResidual) {
  Gen gen(32);
  std::vector<RootSystem> systems = builtin_systems(1.0);
  for (auto& rs : builtin_systems(4.5)) systems.push_back(rs);
  int refused = 0;
  for (const auto& rs : systems) {
    for (int i = 0; i < 150; ++i) {
      const auto d = static_cast<std::size_t>(rs.dim());
      // near-wall chamber points, arbitrary points, and a chamber point plus a large Brownian step
      const double h = std::pow(10.0, gen.uniform(-4.0, 0.0));
      Vector x;
      if (i % 3 == 0) {
        x = gen.chamber_point(rs, 0.05);
      } else if (i % 3 == 1) {
        x = gen.normals(d);
      } else {
        x = gen.chamber_point(rs, 2.0);
        const Vector z = gen.normals(d, 3.0 * std::sqrt(h));
        for (std::size_t c = 0; c < d; ++c) x[c] += z[c];
      }
      SolveResult r;
      try {
        r = solve_exact(rs, x, h);
      } catch (const ConvergenceError& e) {
        // Many Brownian standard deviations outside the chamber the solution hugs a wall so tightly that
        // rounding y to doubles alone leaves a residual above the absolute tolerance.
        EXPECT_LT(rs.min_pairing(x), -10.0 * std::sqrt(h * rs.lipschitz_scale())) << e.what();
        EXPECT_TRUE(rs.in_chamber(e.last_iterate()));
        ++refused;
        continue;
      }
      ASSERT_TRUE(rs.in_chamber(r.y)) << rs.name() << rs.dim() << " i=" << i;
      EXPECT_LE(r.residual, 1e-12) << rs.name() << rs.dim() << " " << to_string(r.method) << " h=" << h << " i=" << i;
      EXPECT_LE(exact_residual(rs, x, h, r.y), 1e-12 * (1.0 + norm(r.y)));

      // x' = y - h f(y) has y as its solution.
      const Vector f = DriftSpec(rs).fk(r.y);
      Vector back(d);
      for (std::size_t c = 0; c < d; ++c) back[c] = r.y[c] - h * f[c];
      EXPECT_LE(distance(solve_exact(rs, back, h, 1e-10).y, r.y), 1e-9 * (1.0 + norm(r.y)));
    }
  }
  EXPECT_LE(refused, 10);
}

TEST(SolverProperty, ContractionCertificate) {
  Gen gen(33);
  const std::vector<RootSystem> systems{RootSystem::type_a(3, 1.0), RootSystem::type_a(4, 2.0),
                                        RootSystem::type_bcd(2, 1.0, 1), RootSystem::type_bcd(3, 0.5, 2),
                                        RootSystem::type_bcd(4, 1.5, 0)};
  for (int i = 0; i < 100; ++i) {
    const auto& rs = systems[static_cast<std::size_t>(i) % systems.size()];
    Vector x = gen.normals(static_cast<std::size_t>(rs.dim()));
    const double scale = gen.uniform(0.0, 5.0) / std::max(norm(x), 1e-12);
    for (auto& v : x) v *= scale;
    const double eps = gen.uniform(0.1, 1.0);
    const double h = 0.5 * eps * eps / rs.lipschitz_scale();
    const Vector y_star = solve_truncated(rs, x, h, eps, 1e-14, 400).y;
    const auto iterates = truncated_iterates(rs, x, h, eps, 60);
    for (int n = 0; n <= 60; ++n) {
      const double bound = iteration_error_bound(rs, h, eps, n);
      if (bound < 1e-13) break;  // y* itself is only known to ~1e-14
      EXPECT_LE(distance(y_star, iterates[static_cast<std::size_t>(n)]), bound) << "instance " << i << " n=" << n;
    }
  }
}

TEST(SolverProperty, ContinuityInTruncationLevel) {
  Gen gen(34);
  const std::vector<RootSystem> systems{RootSystem::type_a(3, 1.0), RootSystem::type_bcd(3, 1.0, 1),
                                        RootSystem::type_bcd(2, 2.0, 2)};
  for (int i = 0; i < 300; ++i) {
    const auto& rs = systems[static_cast<std::size_t>(i) % systems.size()];
    const Vector x = gen.normals(static_cast<std::size_t>(rs.dim()), 2.0);
    const double lk = rs.lipschitz_scale();
    const double h = gen.uniform(1e-3, 0.05);
    const double floor = std::sqrt(h * lk);
    const double eps2 = floor * gen.uniform(1.05, 3.0);
    const double eps1 = eps2 * gen.uniform(1.0, 2.0);
    const Vector y1 = solve_truncated(rs, x, h, eps1, 1e-14, 2000).y;
    const Vector y2 = solve_truncated(rs, x, h, eps2, 1e-14, 2000).y;
    const double bound = rs.weighted_norm_sum() / lk * std::abs(eps1 - eps2) / (1.0 - h * lk / (eps2 * eps2));
    EXPECT_LE(distance(y1, y2), bound * (1.0 + 1e-9) + 1e-13);
  }
}

TEST(SolverProperty, TruncatedAgreesWithExactWhenTruncationInactive) {
  Gen gen(35);
  int compared = 0;
  for (const auto& rs : builtin_systems(1.0)) {
    for (int i = 0; i < 200; ++i) {
      const Vector x = gen.normals(static_cast<std::size_t>(rs.dim()), 3.0);
      const double eps = gen.uniform(0.05, 0.5);
      const double h = 0.5 * eps * eps / rs.lipschitz_scale();
      const auto t = solve_truncated(rs, x, h, eps);
      if (!(rs.min_pairing(t.y) > eps)) continue;
      ++compared;
      EXPECT_LE(distance(t.y, solve_exact(rs, x, h).y), 1e-11);
    }
  }
  EXPECT_GT(compared, 200);
}

TEST(ImplicitStepSolver, ReusableAcrossCalls) {
  const auto rs = RootSystem::type_a(3, 2.0);
  ImplicitStepSolver solver(rs);
  SolveResult a, b;
  solver.solve_exact(Vector{1.0, 0.0, -1.0}, 0.01, a);
  solver.solve_exact(Vector{5.0, 0.1, 0.0}, 0.1, b);
  solver.solve_exact(Vector{1.0, 0.0, -1.0}, 0.01, b);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(error_code_of([&] { ImplicitStepSolver(rs, {0.0, 10, 10}); }), ErrorCode::invalid_parameter);
}

}  // namespace
}  // namespace dunkl
