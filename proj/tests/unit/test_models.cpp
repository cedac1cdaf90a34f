#include <cmath>

#include <gtest/gtest.h>

#include "dunkl/models.hpp"
#include "dunkl/rng.hpp"
#include "test_util.hpp"

namespace dunkl {
namespace {

using testing::error_code_of;
using testing::Gen;

TEST(Preset, DefaultInitialConditions) {
  EXPECT_EQ(preset("bessel", {}).x0, (Vector{1.0}));
  EXPECT_EQ(preset("dyson", {}).x0, (Vector{1.0, 0.0, -1.0}));
  EXPECT_EQ(preset("dyson", {.d = 4}).x0, (Vector{1.5, 0.5, -0.5, -1.5}));
  EXPECT_EQ(preset("type_b", {}).x0, (Vector{3.0, 2.0, 1.0}));
  EXPECT_EQ(preset("type_d", {.d = 4}).x0, (Vector{4.0, 3.0, 2.0, 1.0}));
  EXPECT_EQ(preset("wishart", {}).x0, (Vector{2.0, 1.0}));
}

TEST(Preset, EveryDefaultHasAComfortableMargin) {
  for (const char* name : {"bessel", "dyson", "type_b", "type_c", "type_d", "wishart", "heckman_opdam"}) {
    for (int d : {2, 3, 5}) {
      const ModelSpec m = std::string(name) == "bessel" ? preset(name, {}) : preset(name, {.d = d, .k = 1.5});
      EXPECT_TRUE(m.root_system().in_chamber(m.x0, 1e-6)) << name << d;
      EXPECT_EQ(m.label, name);
    }
  }
}

TEST(Preset, DysonDriftAtInitialCondition) {
  const ModelSpec m = preset("dyson", {.d = 3, .k = 1.0, .x0 = Vector{1.0, 0.0, -1.0}});
  EXPECT_EQ(m.root_system().name(), "A");
  const Vector f = m.drift.fk(m.x0);
  EXPECT_DOUBLE_EQ(f[0], 1.5);
  EXPECT_DOUBLE_EQ(f[1], 0.0);
  EXPECT_DOUBLE_EQ(f[2], -1.5);
}

TEST(Preset, BesselBoundaryMultiplicity) {
  const ModelSpec m = preset("bessel", {.k = 0.5, .x0 = Vector{1.0}});
  EXPECT_DOUBLE_EQ(m.root_system().min_nu(), 0.0);
  EXPECT_FALSE(m.flags.multiplicity_below_half);
  EXPECT_TRUE(preset("bessel", {.k = 0.25}).flags.multiplicity_below_half);
}

TEST(Preset, WishartSquaresInitialState) {
  const ModelSpec m = preset("wishart", {.d = 2, .k = 5.0, .r = 1, .x0 = Vector{2.0, 1.0}});
  EXPECT_EQ(m.transform, Transform::square_components);
  Path p;
  p.dim = 2;
  p.times = {0.0};
  p.data = m.x0;
  EXPECT_EQ(wishart_transform(p).data, (Vector{4.0, 1.0}));
}

TEST(Preset, TheoryFlags) {
  const auto f = preset("dyson", {.k = 5.0}).flags;  // nu = 4.5
  EXPECT_TRUE(f.order_half);
  EXPECT_FALSE(f.truncated_rate);
  EXPECT_FALSE(f.order_one);
  EXPECT_TRUE(preset("dyson", {.k = 7.0}).flags.truncated_rate);
  EXPECT_TRUE(preset("bessel", {.k = 16.5}).flags.order_one);
  EXPECT_FALSE(preset("bessel", {.k = 6.5}).flags.truncated_rate);  // nu > 6 is strict
}

TEST(Preset, Errors) {
  EXPECT_EQ(error_code_of([] { preset("type_e", {}); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(error_code_of([] { preset("bessel", {.d = 2}); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(error_code_of([] { preset("dyson", {.d = 1}); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(error_code_of([] { preset("type_b", {.r = 2}); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(error_code_of([] { preset("dyson", {.x0 = Vector{0.0, 1.0, 2.0}}); }), ErrorCode::configuration);
  EXPECT_EQ(error_code_of([] { preset("dyson", {.x0 = Vector{1.0, 0.0}}); }), ErrorCode::configuration);
}

TEST(Preset, HeckmanOpdamInstallsBoundedDrift) {
  const ModelSpec m = preset("heckman_opdam", {.d = 3, .k = 2.0});
  EXPECT_EQ(m.drift.extra().kind(), DriftKind::heckman_opdam);
  EXPECT_EQ(preset("dyson", {.d = 3, .k = 2.0}).drift.extra().kind(), DriftKind::none);
}

TEST(CustomModel, DefaultsToChamberPoint) {
  const ModelSpec m = custom_model(RootSystem::type_bcd(3, 1.0, 2), std::nullopt);
  EXPECT_TRUE(m.root_system().in_chamber(m.x0, 1e-6));
  EXPECT_EQ(m.label, "custom");
}

TEST(WishartTransform, Examples) {
  Path p;
  p.dim = 3;
  p.times = {0.0, 1.0};
  p.data = {3.0, 2.0, 1.0, -0.5, 0.25, 0.0};
  const Path y = wishart_transform(p);
  EXPECT_EQ(y.times, p.times);
  EXPECT_EQ(y.data, (Vector{9.0, 4.0, 1.0, 0.25, 0.0625, 0.0}));
}

TEST(WishartTransform, OrderedAndNonnegativeAlongPaths) {
  for (int r : {1, 2}) {
    const ModelSpec m = preset("wishart", {.d = 3, .k = 1.0, .r = r});
    SchemeConfig c;
    c.n_steps = 512;
    for (std::uint64_t path = 0; path < 20; ++path) {
      const auto incr = BrownianLattice(11, path, 512, 1.0, 3).fine_increments();
      const Path y = wishart_transform(simulate_path(m, c, incr));
      for (std::size_t l = 0; l < y.size(); ++l) {
        const auto s = y.state(l);
        EXPECT_GE(s[0], s[1]);
        EXPECT_GE(s[1], s[2]);
        EXPECT_GE(s[2], 0.0);
      }
    }
  }
}

TEST(WishartTransform, ZeroMultiplicitySquaresBrownianCoordinates) {
  const ModelSpec m = preset("wishart", {.d = 2, .k = 0.0});
  SchemeConfig c;
  c.n_steps = 8;
  const auto incr = BrownianLattice(1, 0, 8, 1.0, 2).fine_increments();
  const Path y = wishart_transform(simulate_path(m, c, incr));
  Vector b = m.x0;
  for (std::size_t l = 1; l <= 8; ++l) {
    for (std::size_t i = 0; i < 2; ++i) b[i] += incr[(l - 1) * 2 + i];
    EXPECT_NEAR(y.state(l)[0], b[0] * b[0], 1e-13);
    EXPECT_NEAR(y.state(l)[1], b[1] * b[1], 1e-13);
  }
}

TEST(WishartProperty, DriftIdentity) {
  Gen gen(51);
  for (int d : {2, 3, 5}) {
    const auto rs = RootSystem::type_bcd(d, 1.0, 1);
    for (int n = 0; n < 500; ++n) {
      const Vector x = gen.chamber_point(rs, 2.0);
      for (int i = 0; i < d; ++i) {
        double lhs = 0.0, rhs = 0.0, scale = 0.0;
        for (int j = 0; j < d; ++j) {
          if (j == i) continue;
          lhs += 1.0 / (x[i] - x[j]) + 1.0 / (x[i] + x[j]);
          rhs += (x[i] * x[i] + x[j] * x[j]) / (x[i] * x[i] - x[j] * x[j]);
          scale += std::abs(1.0 / (x[i] - x[j])) + std::abs(1.0 / (x[i] + x[j]));
        }
        rhs = rhs / x[i] + (d - 1) / x[i];
        // relative to the size of the summands, since the sum itself can cancel
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * scale);
      }
    }
  }
}

}  // namespace
}  // namespace dunkl
