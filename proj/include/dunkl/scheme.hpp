#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dunkl/coeff.hpp"
#include "dunkl/solver.hpp"

namespace dunkl {

struct ModelSpec;

enum class Variant { semi_implicit, truncated };
const char* to_string(Variant v) noexcept;

/// Truncation level for the truncated scheme: either a fixed eps, or
/// eps = sqrt(c L_k dt) with c > 1.
struct EpsRule {
  enum class Kind { fixed, scaled };
  Kind kind = Kind::scaled;
  double value = 2.0;

  static EpsRule fixed(double eps) { return {Kind::fixed, eps}; }
  static EpsRule scaled(double c) { return {Kind::scaled, c}; }
};

struct SchemeConfig {
  Variant variant = Variant::semi_implicit;
  std::int64_t n_steps = 0;
  double horizon = 1.0;
  EpsRule eps_rule{};
  double solver_tol = 1e-12;
  double initial_margin = 0.0;

  double dt() const { return horizon / static_cast<double>(n_steps); }
  /// Truncation level resolved against a root system (truncated variant only).
  double epsilon(const RootSystem& rs) const;
  /// Throws Error(configuration) / Error(contract_violation) on invalid settings.
  void validate(const RootSystem& rs) const;
};

struct PathStats {
  std::int64_t solver_iterations = 0;
  int max_iterations = 0;
  std::int64_t closed_form = 0;
  std::int64_t fixed_point = 0;
  std::int64_t newton = 0;
};

/// Grid values of one realization; states are stored row-major, (n+1) x d.
struct Path {
  int dim = 0;
  std::vector<double> times;
  std::vector<double> data;
  PathStats stats;

  std::size_t size() const noexcept { return times.size(); }
  std::span<const double> state(std::size_t l) const {
    return {data.data() + l * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<double> state(std::size_t l) {
    return {data.data() + l * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// y = x_prev + dB + (f_k(y) + b(t_prev, x_prev)) dt, y in the chamber.
Vector step_semi_implicit(const DriftSpec& spec, std::span<const double> x_prev, std::span<const double> dB,
                          double t_prev, double dt);
/// y = x_prev + dB + (f_{k,eps}(y) + b(t_prev, x_prev)) dt, y anywhere in R^d.
Vector step_truncated(const DriftSpec& spec, std::span<const double> x_prev, std::span<const double> dB,
                      double t_prev, double dt, double eps);

/// Reusable path engine; owns solver scratch space. One instance per thread.
class PathSimulator {
 public:
  PathSimulator(const ModelSpec& model, const SchemeConfig& config);

  const SchemeConfig& config() const noexcept { return config_; }
  double epsilon() const noexcept { return eps_; }

  /// increments: n_steps x d row-major Brownian increments.
  void run(std::span<const double> increments, Path& out);

 private:
  const ModelSpec* model_;
  SchemeConfig config_;
  double eps_ = 0.0;
  ImplicitStepSolver solver_;
  SolveResult result_;
  Vector rhs_;
};

Path simulate_path(const ModelSpec& model, const SchemeConfig& config, std::span<const double> increments);

/// CSV with header t,x1,...,xd and 17 significant digits.
void write_path_csv(std::ostream& os, const Path& path);

}  // namespace dunkl
