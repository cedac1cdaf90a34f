#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dunkl/rootsys.hpp"

namespace dunkl {

/// Outcome of one pointwise property over a batch of random points.
/// `worst` is the largest observed lhs - rhs; the property holds when it is <= 0.
struct PropertyResult {
  std::string name;
  bool passed = true;
  double worst = -std::numeric_limits<double>::infinity();
  std::int64_t samples = 0;
};

struct InvariantOptions {
  std::int64_t points = 1000;
  std::uint64_t seed = 0;
  double scale = 1.0;          // std. deviation of the raw Gaussian points
  double fd_step = 1e-3;
  std::vector<double> eps_values{0.1, 0.5, 1.0};
};

/// Fourth-order central finite-difference Laplacian of the alternating polynomial.
double fd_laplacian_poly(const RootSystem& rs, std::span<const double> x, double h);

/// Random points strictly inside the chamber: Gaussian samples folded by reflections.
std::vector<Vector> random_chamber_points(const RootSystem& rs, std::int64_t count, std::uint64_t seed,
                                          double scale = 1.0);

/// Harmonicity, the sum identities, one-sided Lipschitz, and the g/f truncation bounds.
std::vector<PropertyResult> invariant_suite(const RootSystem& rs, const InvariantOptions& options = {});

nlohmann::json to_json(const std::vector<PropertyResult>& results);

}  // namespace dunkl
