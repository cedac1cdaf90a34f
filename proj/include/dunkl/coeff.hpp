#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "dunkl/rootsys.hpp"

namespace dunkl {

/// Truncated reciprocal 1 / max(x, eps).
double g_eps(double x, double eps);

/// coth(u) - 1/u, odd, smooth on R and bounded by 1 in absolute value.
double coth_minus_inverse(double u);

enum class DriftKind { none, constant, heckman_opdam, user_callback };
enum class Smoothness { measurable, lipschitz_holder, c12_bounded };

const char* to_string(DriftKind kind) noexcept;
const char* to_string(Smoothness s) noexcept;

/// Writes b(t, x) into `out`. Must be pure and safe to call concurrently.
using DriftCallback = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// The bounded extra drift b(t, x). declared_bound is sup |b|, declared_lipschitz
/// its spatial Lipschitz modulus.
class BoundedDrift {
 public:
  BoundedDrift() = default;

  static BoundedDrift none();
  static BoundedDrift constant(Vector value);
  /// Bounded correction turning f_k into the radial Heckman-Opdam drift.
  static BoundedDrift heckman_opdam(const RootSystem& rs);
  static BoundedDrift user(DriftCallback fn, double declared_bound, double declared_lipschitz,
                           Smoothness smoothness = Smoothness::lipschitz_holder);

  DriftKind kind() const noexcept { return kind_; }
  bool is_zero() const noexcept { return kind_ == DriftKind::none; }
  double declared_bound() const noexcept { return bound_; }
  double declared_lipschitz() const noexcept { return lipschitz_; }
  Smoothness smoothness() const noexcept { return smoothness_; }
  const Vector& constant_value() const noexcept { return constant_; }

  /// out += b(t, x)
  void add_to(double t, std::span<const double> x, std::span<double> out) const;
  Vector eval(double t, std::span<const double> x) const;

 private:
  DriftKind kind_ = DriftKind::none;
  double bound_ = 0.0;
  double lipschitz_ = 0.0;
  Smoothness smoothness_ = Smoothness::c12_bounded;
  Vector constant_;
  std::shared_ptr<const RootSystem> rs_;
  DriftCallback fn_;
};

/// f_k together with its truncation f_{k,eps} and an optional bounded extra drift.
class DriftSpec {
 public:
  explicit DriftSpec(RootSystem rs, BoundedDrift extra = BoundedDrift::none());

  const RootSystem& root_system() const noexcept { return rs_; }
  const BoundedDrift& extra() const noexcept { return extra_; }
  int dim() const noexcept { return rs_.dim(); }

  /// Singular drift sum k(a) a / <a, x>. Throws Error(domain) unless x is strictly inside the chamber.
  Vector fk(std::span<const double> x) const;
  void fk_into(std::span<const double> x, std::span<double> out) const;

  /// Truncated drift sum k(a) g_eps(<a, x>) a, defined on all of R^d.
  Vector fk_eps(std::span<const double> x, double eps) const;
  void fk_eps_into(std::span<const double> x, double eps, std::span<double> out) const;

 private:
  RootSystem rs_;
  BoundedDrift extra_;
};

Vector eval_fk(const DriftSpec& spec, std::span<const double> x);
Vector eval_fk_eps(const DriftSpec& spec, std::span<const double> x, double eps);

/// sum (k(a)/2) (coth(<a,x>/2) - 2/<a,x>) a; throws Error(domain) outside the chamber.
Vector heckman_opdam_drift(const RootSystem& rs, double t, std::span<const double> x);

}  // namespace dunkl
