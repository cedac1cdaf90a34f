#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dunkl/coeff.hpp"
#include "dunkl/scheme.hpp"

namespace dunkl {

enum class Transform { none, square_components };

/// Which hypotheses of the convergence theorems an instance satisfies.
struct TheoryFlags {
  bool multiplicity_below_half = false;  // some k < 1/2: outside the existence theory
  bool order_half = false;               // min nu >= 3
  bool order_one = false;                // min nu >= 16
  bool truncated_rate = false;           // min nu > 6
};

struct ModelSpec {
  DriftSpec drift;
  Vector x0;
  std::string label;
  Transform transform = Transform::none;
  TheoryFlags flags;

  const RootSystem& root_system() const noexcept { return drift.root_system(); }
  int dim() const noexcept { return drift.dim(); }
};

struct PresetParams {
  std::optional<int> d;
  double k = 1.0;
  std::optional<int> r;  // 0 = D, 1 = B, 2 = C (wishart only)
  std::optional<Vector> x0;
  BoundedDrift extra;    // ignored by heckman_opdam, which installs its own
};

/// Names: bessel, dyson, type_b, type_c, type_d, wishart, heckman_opdam.
ModelSpec preset(std::string_view name, const PresetParams& params);

/// Binds an arbitrary root system; x0 defaults to the folded witness direction.
ModelSpec custom_model(RootSystem rs, std::optional<Vector> x0, BoundedDrift extra = {},
                       std::string label = "custom");

TheoryFlags theory_flags(const RootSystem& rs);

/// Componentwise square of every state on the same grid.
Path wishart_transform(const Path& path);

}  // namespace dunkl
