#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dunkl {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// Orthogonal reflection of x in the hyperplane perpendicular to alpha.
Vector reflect(std::span<const double> alpha, std::span<const double> x);

/// One axiom failure found while validating a candidate positive root system.
/// `first`/`second` index into the candidate's positive roots; -1 when unused.
struct AxiomViolation {
  std::string axiom;  // "R1", "R2", "multiplicity", "separation"
  int first = -1;
  int second = -1;
  std::string message;
};

/// A validated reduced root system, stored through its positive half R_+ and a
/// Weyl-invariant multiplicity on it. Immutable once built.
class RootSystem {
 public:
  static RootSystem bessel(double k);
  static RootSystem type_a(int d, double k);
  static RootSystem type_bcd(int d, double k, int r);
  /// Throws Error(validation) listing every violated axiom.
  static RootSystem custom(int dim, const std::vector<Vector>& positive_roots,
                           const std::vector<double>& multiplicities, std::string name = "custom");
  /// { "dim": int, "positive_roots": [[...]], "multiplicities": [...] }
  static RootSystem from_json(const nlohmann::json& doc);
  static std::vector<AxiomViolation> check_axioms(int dim, const std::vector<Vector>& positive_roots,
                                                  const std::vector<double>& multiplicities);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return mult_.size(); }
  const std::string& name() const noexcept { return name_; }

  std::span<const double> root(std::size_t i) const {
    return {roots_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  /// Row-major |R_+| x d block of positive roots.
  std::span<const double> root_data() const noexcept { return roots_; }
  double root_norm_sq(std::size_t i) const { return norm_sq_[i]; }
  double multiplicity(std::size_t i) const { return mult_[i]; }
  const std::vector<double>& multiplicities() const noexcept { return mult_; }
  double nu(std::size_t i) const { return mult_[i] - 0.5; }
  double min_nu() const;
  /// Orbit label of each positive root under the reflections of R.
  const std::vector<int>& orbits() const noexcept { return orbit_; }

  /// gamma_k = sum of multiplicities over R_+.
  double gamma() const noexcept { return gamma_; }
  /// L_k = sqrt(|R_+| sum k(a)^2 |a|^4).
  double lipschitz_scale() const noexcept { return lipschitz_; }
  /// sum k(a) |a| over R_+.
  double weighted_norm_sum() const noexcept { return weighted_norm_sum_; }
  bool crystallographic() const noexcept { return crystallographic_; }
  /// beta with <beta, a> > 0 for every positive root.
  std::span<const double> witness() const noexcept { return witness_; }

  /// Same geometry, new multiplicities (re-checked for orbit consistency).
  RootSystem with_multiplicities(std::vector<double> multiplicities) const;

  bool in_chamber(std::span<const double> x, double margin = 0.0) const;
  /// min over R_+ of <a, x>.
  double min_pairing(std::span<const double> x) const;
  double alternating_poly(std::span<const double> x) const;
  double harmonic_identity_residual(std::span<const double> x) const;

  /// Maps x into the closed fundamental chamber by repeated reflections.
  Vector fold_into_chamber(std::span<const double> x) const;

  nlohmann::json to_json() const;

 private:
  RootSystem() = default;
  static RootSystem build(int dim, const std::vector<Vector>& positive_roots, std::vector<double> multiplicities,
                          std::string name);
  void check_dim(std::span<const double> x) const;

  int dim_ = 0;
  std::string name_;
  std::vector<double> roots_;
  std::vector<double> norm_sq_;
  std::vector<double> mult_;
  std::vector<int> orbit_;
  std::vector<double> witness_;
  double gamma_ = 0.0;
  double lipschitz_ = 0.0;
  double weighted_norm_sum_ = 0.0;
  bool crystallographic_ = false;
};

RootSystem build_bessel(double k);
RootSystem build_type_a(int d, double k);
RootSystem build_type_bcd(int d, double k, int r);
RootSystem build_custom(int dim, const std::vector<Vector>& positive_roots, const std::vector<double>& multiplicities);

}  // namespace dunkl
