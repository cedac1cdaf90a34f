#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "dunkl/error.hpp"
#include "dunkl/rootsys.hpp"

namespace dunkl::testing {

// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  Vector normals(std::size_t d, double scale = 1.0) {
    Vector v(d);
    for (auto& x : v) x = scale * normal();
    return v;
  }
  Vector chamber_point(const RootSystem& rs, double scale = 1.0) {
    for (;;) {
      Vector x = rs.fold_into_chamber(normals(static_cast<std::size_t>(rs.dim()), scale));
      if (rs.in_chamber(x)) return x;
    }
  }

 private:
  std::mt19937_64 eng_;
};

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// The built-in systems used across property tests.
inline std::vector<RootSystem> builtin_systems(double k = 1.0) {
  return {RootSystem::bessel(k),         RootSystem::type_a(2, k),       RootSystem::type_a(3, k),
          RootSystem::type_a(4, k),      RootSystem::type_bcd(2, k, 1),  RootSystem::type_bcd(3, k, 1),
          RootSystem::type_bcd(3, k, 2), RootSystem::type_bcd(3, k, 0),  RootSystem::type_bcd(4, k, 0)};
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a dunkl::Error";
  return static_cast<ErrorCode>(0);
}

}  // namespace dunkl::testing
