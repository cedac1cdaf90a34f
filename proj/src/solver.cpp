#include "dunkl/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dunkl/coeff.hpp"
#include "dunkl/error.hpp"

namespace dunkl {
namespace {

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

const char* to_string(SolveMethod m) noexcept {
  switch (m) {
    case SolveMethod::closed_form: return "closed_form";
    case SolveMethod::fixed_point: return "fixed_point";
    case SolveMethod::continuation_newton: return "continuation_newton";
  }
  return "?";
}

void check_contraction(const RootSystem& rs, double h, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_parameter, "truncation level eps must be > 0");
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_parameter, "step size h must be > 0");
  const double lk = rs.lipschitz_scale();
  if (!(h * lk < eps * eps)) {
    std::ostringstream os;
    os.precision(17);
    os << "contraction not guaranteed: need h in (0, eps^2/L_k), got h=" << h << ", eps=" << eps << ", L_k=" << lk
       << " (eps^2/L_k=" << eps * eps / lk << ")";
    throw Error(ErrorCode::contract_violation, os.str());
  }
}

namespace {

[[noreturn]] void fail_exact(double h, const SolveResult& out) {
  std::ostringstream os;
  os.precision(17);
  os << "solve_exact: damped Newton did not converge (h=" << h << ", residual=" << out.residual << ")";
  throw ConvergenceError(os.str(), out.y, out.residual);
}

}  // namespace

ImplicitStepSolver::ImplicitStepSolver(const RootSystem& rs, SolverSettings settings)
    : rs_(&rs), settings_(settings), d_(static_cast<std::size_t>(rs.dim())) {
  if (!(settings_.tol > 0.0)) throw Error(ErrorCode::invalid_parameter, "solver tolerance must be > 0");
  if (settings_.max_fixed_point < 1 || settings_.max_newton < 1)
    throw Error(ErrorCode::invalid_parameter, "solver iteration limits must be >= 1");
  for (std::size_t a = 0; a < rs.size(); ++a)
    if (rs.multiplicity(a) > 0.0) active_.push_back(a);
  for (Vector* v : {&f_, &y_, &next_, &step_, &trial_, &ftrial_}) v->assign(d_, 0.0);
  s_.assign(rs.size(), 0.0);
  jac_.assign(d_ * d_, 0.0);
}

double ImplicitStepSolver::truncated_residual(std::span<const double> x, double h, double eps,
                                              std::span<const double> y) {
  const auto roots = rs_->root_data();
  for (std::size_t i = 0; i < d_; ++i) f_[i] = y[i] - x[i];
  for (std::size_t a : active_) {
    const double* alpha = roots.data() + a * d_;
    double s = 0.0;
    for (std::size_t i = 0; i < d_; ++i) s += alpha[i] * y[i];
    const double c = h * rs_->multiplicity(a) / std::max(s, eps);
    for (std::size_t i = 0; i < d_; ++i) f_[i] -= c * alpha[i];
  }
  return norm(f_);
}

void ImplicitStepSolver::solve_truncated(std::span<const double> x, double h, double eps, SolveResult& out) {
  check_contraction(*rs_, h, eps);
  if (x.size() != d_) throw Error(ErrorCode::invalid_parameter, "solve_truncated: dimension mismatch");
  const auto roots = rs_->root_data();
  out.y.assign(x.begin(), x.end());
  out.method = SolveMethod::fixed_point;
  for (int it = 1; it <= settings_.max_fixed_point; ++it) {
    // next = x + h f_{k,eps}(y)
    for (std::size_t i = 0; i < d_; ++i) next_[i] = x[i];
    for (std::size_t a : active_) {
      const double* alpha = roots.data() + a * d_;
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += alpha[i] * out.y[i];
      const double c = h * rs_->multiplicity(a) / std::max(s, eps);
      for (std::size_t i = 0; i < d_; ++i) next_[i] += c * alpha[i];
    }
    const double change = dist(next_, out.y);
    std::copy(next_.begin(), next_.end(), out.y.begin());
    if (change <= settings_.tol) {
      out.iterations = it;
      out.residual = truncated_residual(x, h, eps, out.y);
      if (out.residual <= settings_.tol) return;
    }
  }
  out.iterations = settings_.max_fixed_point;
  out.residual = truncated_residual(x, h, eps, out.y);
  if (out.residual <= settings_.tol) return;
  throw ConvergenceError("solve_truncated: fixed-point iteration did not reach tolerance in " +
                             std::to_string(settings_.max_fixed_point) + " iterations",
                         out.y, out.residual);
}

double ImplicitStepSolver::exact_residual(std::span<const double> x, double h, std::span<const double> y,
                                          std::span<double> f) {
  const auto roots = rs_->root_data();
  for (std::size_t i = 0; i < d_; ++i) f[i] = y[i] - x[i];
  for (std::size_t a : active_) {
    const double* alpha = roots.data() + a * d_;
    double s = 0.0;
    for (std::size_t i = 0; i < d_; ++i) s += alpha[i] * y[i];
    const double c = h * rs_->multiplicity(a) / s;
    for (std::size_t i = 0; i < d_; ++i) f[i] -= c * alpha[i];
  }
  return norm(f);
}

void ImplicitStepSolver::solve_exact(std::span<const double> x, double h, SolveResult& out) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_parameter, "solve_exact: step size h must be > 0");
  if (x.size() != d_) throw Error(ErrorCode::invalid_parameter, "solve_exact: dimension mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_parameter, "solve_exact: non-finite input point");

  if (active_.empty()) {
    out.y.assign(x.begin(), x.end());
    out.iterations = 0;
    out.residual = 0.0;
    out.method = SolveMethod::closed_form;
    return;
  }

  if (active_.size() == 1) {
    // <a,y> = s solves s^2 - <a,x> s - c|a|^2 = 0; the chamber root is the positive one.
    const std::size_t a = active_.front();
    const auto alpha = rs_->root(a);
    const double c = h * rs_->multiplicity(a);
    const double p = dot(alpha, x);
    const double q = c * rs_->root_norm_sq(a);
    const double disc = std::sqrt(p * p + 4.0 * q);
    const double s = p >= 0.0 ? 0.5 * (p + disc) : 2.0 * q / (disc - p);
    // y = x_perp + (s/|a|^2) a; writing the alpha component through s avoids cancellation for x far outside.
    const double n2 = rs_->root_norm_sq(a);
    out.y.assign(x.begin(), x.end());
    for (std::size_t i = 0; i < d_; ++i) out.y[i] += (s - p) / n2 * alpha[i];
    if (d_ == 1) out.y[0] = s / alpha[0];
    out.iterations = 0;
    out.method = SolveMethod::closed_form;
    out.residual = exact_residual(x, h, out.y, f_);
    if (out.residual <= settings_.tol) return;
    if (!newton(x, h, 0.0, out)) fail_exact(h, out);
    return;
  }

  // eps-continuation: with eps0^2 = 2 h L_k the truncated map is a contraction with ratio 1/2.
  const double eps0 = std::sqrt(2.0 * h * rs_->lipschitz_scale());
  int fp_iterations = 0;
  bool have_truncated = false;
  try {
    solve_truncated(x, h, eps0, out);
    fp_iterations = out.iterations;
    have_truncated = true;
  } catch (const ConvergenceError&) {
    fp_iterations = settings_.max_fixed_point;
  }
  if (have_truncated) {
    double clearance = std::numeric_limits<double>::infinity();
    for (std::size_t a : active_) clearance = std::min(clearance, dot(rs_->root(a), out.y));
    if (clearance > eps0) {
      // Truncation inactive at the fixed point, so it solves the exact equation too.
      out.residual = exact_residual(x, h, out.y, f_);
      if (out.residual <= settings_.tol) {
        out.method = SolveMethod::fixed_point;
        return;
      }
    }
  } else {
    out.y.assign(x.begin(), x.end());
  }
  if (!newton(x, h, eps0, out)) fail_exact(h, out);
  out.iterations += fp_iterations;
}

bool ImplicitStepSolver::newton(std::span<const double> x, double h, double start_margin, SolveResult& out) {
  const auto roots = rs_->root_data();
  const auto w = rs_->witness();
  out.method = SolveMethod::continuation_newton;
  out.iterations = 0;

  // Push the truncated solution along the witness direction until every active pairing is >= start_margin.
  double shift = 0.0;
  for (std::size_t a : active_) {
    const auto alpha = rs_->root(a);
    shift = std::max(shift, (start_margin - dot(alpha, out.y)) / dot(alpha, w));
  }
  for (std::size_t i = 0; i < d_; ++i) out.y[i] += shift * w[i];

  auto merit = [&](std::span<const double> y) {
    double phi = 0.0;
    for (std::size_t i = 0; i < d_; ++i) phi += 0.5 * (y[i] - x[i]) * (y[i] - x[i]);
    for (std::size_t a : active_) phi -= h * rs_->multiplicity(a) * std::log(dot(rs_->root(a), y));
    return phi;
  };

  double res = exact_residual(x, h, out.y, f_);
  double phi = merit(out.y);
  Eigen::Map<Eigen::MatrixXd> jac(jac_.data(), static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
  for (int it = 0; it < settings_.max_newton; ++it) {
    if (res <= settings_.tol) {
      out.residual = res;
      return true;
    }
    ++out.iterations;
    // J = I + h sum k a a^T / <a,y>^2 is symmetric positive definite.
    jac.setIdentity();
    double min_s = std::numeric_limits<double>::infinity();
    for (std::size_t a : active_) {
      const double* alpha = roots.data() + a * d_;
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += alpha[i] * out.y[i];
      min_s = std::min(min_s, s);
      const double c = h * rs_->multiplicity(a) / (s * s);
      for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < d_; ++j) jac(i, j) += c * alpha[i] * alpha[j];
    }
    Eigen::Map<const Eigen::VectorXd> fvec(f_.data(), static_cast<Eigen::Index>(d_));
    const Eigen::VectorXd delta = -jac.llt().solve(fvec);
    const double slope = fvec.dot(delta);

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
      for (std::size_t i = 0; i < d_; ++i) trial_[i] = out.y[i] + t * delta[static_cast<Eigen::Index>(i)];
      bool inside = true;
      for (std::size_t a : active_)
        if (!(dot(rs_->root(a), trial_) > 1e-3 * min_s)) {
          inside = false;
          break;
        }
      if (!inside) continue;
      const double trial_res = exact_residual(x, h, trial_, ftrial_);
      const double trial_phi = merit(trial_);
      if (trial_phi <= phi + 1e-4 * t * slope || trial_res < res) {
        std::copy(trial_.begin(), trial_.end(), out.y.begin());
        std::copy(ftrial_.begin(), ftrial_.end(), f_.begin());
        res = trial_res;
        phi = trial_phi;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  out.residual = res;
  return res <= settings_.tol;
}

SolveResult solve_truncated(const RootSystem& rs, std::span<const double> x, double h, double eps, double tol,
                            int max_iter) {
  ImplicitStepSolver solver(rs, {tol, max_iter, 50});
  SolveResult out;
  solver.solve_truncated(x, h, eps, out);
  return out;
}

SolveResult solve_exact(const RootSystem& rs, std::span<const double> x, double h, double tol, int max_iter) {
  ImplicitStepSolver solver(rs, {tol, max_iter, 50});
  SolveResult out;
  solver.solve_exact(x, h, out);
  return out;
}

double iteration_error_bound(const RootSystem& rs, double h, double eps, int n_iter) {
  check_contraction(rs, h, eps);
  if (n_iter < 0) throw Error(ErrorCode::invalid_parameter, "iteration_error_bound: n_iter must be >= 0");
  const double lk = rs.lipschitz_scale();
  if (lk == 0.0) return 0.0;
  const double ratio = lk * h / (eps * eps);
  return rs.weighted_norm_sum() / (lk * (1.0 - ratio)) * eps * std::pow(ratio, n_iter);
}

std::vector<Vector> truncated_iterates(const RootSystem& rs, std::span<const double> x, double h, double eps,
                                       int n_iter) {
  check_contraction(rs, h, eps);
  DriftSpec spec(rs);
  std::vector<Vector> out;
  out.emplace_back(x.begin(), x.end());
  for (int n = 0; n < n_iter; ++n) {
    Vector next = spec.fk_eps(out.back(), eps);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = x[i] + h * next[i];
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace dunkl
