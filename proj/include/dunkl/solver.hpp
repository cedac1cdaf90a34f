#pragma once

#include <span>
#include <vector>

#include "dunkl/rootsys.hpp"

namespace dunkl {

enum class SolveMethod { closed_form, fixed_point, continuation_newton };
const char* to_string(SolveMethod m) noexcept;

struct SolveResult {
  Vector y;
  int iterations = 0;
  double residual = 0.0;
  SolveMethod method = SolveMethod::closed_form;
};

struct SolverSettings {
  double tol = 1e-12;       // absolute residual
  int max_fixed_point = 200;
  int max_newton = 50;
};

/// Solves the per-step implicit equations
///   y = x + h f_k(y)        (y in the chamber), and
///   y = x + h f_{k,eps}(y)  (y anywhere),
/// reusing internal scratch buffers across calls. Not thread-safe; use one per thread.
class ImplicitStepSolver {
 public:
  explicit ImplicitStepSolver(const RootSystem& rs, SolverSettings settings = {});

  const SolverSettings& settings() const noexcept { return settings_; }

  /// Fixed-point iteration from y = x. Requires h < eps^2 / L_k.
  void solve_truncated(std::span<const double> x, double h, double eps, SolveResult& out);
  /// Chamber-valued solution; closed form, eps-continuation, then damped Newton.
  void solve_exact(std::span<const double> x, double h, SolveResult& out);

 private:
  double truncated_residual(std::span<const double> x, double h, double eps, std::span<const double> y);
  bool newton(std::span<const double> x, double h, double start_margin, SolveResult& out);
  double exact_residual(std::span<const double> x, double h, std::span<const double> y, std::span<double> f);

  const RootSystem* rs_;
  SolverSettings settings_;
  std::vector<std::size_t> active_;  // roots with k > 0
  std::size_t d_;
  Vector f_, y_, next_, step_, trial_, ftrial_, s_;
  std::vector<double> jac_;
};

SolveResult solve_truncated(const RootSystem& rs, std::span<const double> x, double h, double eps,
                            double tol = 1e-12, int max_iter = 200);
SolveResult solve_exact(const RootSystem& rs, std::span<const double> x, double h, double tol = 1e-12,
                        int max_iter = 200);

/// A priori bound on |y* - y^(n)| for the truncated fixed-point iteration started at y^(0) = x.
double iteration_error_bound(const RootSystem& rs, double h, double eps, int n_iter);

/// The iterates y^(0) = x, ..., y^(n_iter) of y -> x + h f_{k,eps}(y).
std::vector<Vector> truncated_iterates(const RootSystem& rs, std::span<const double> x, double h, double eps,
                                       int n_iter);

/// Throws Error(contract_violation) unless h < eps^2 / L_k.
void check_contraction(const RootSystem& rs, double h, double eps);

}  // namespace dunkl
