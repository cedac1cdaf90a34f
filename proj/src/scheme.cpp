#include "dunkl/scheme.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "dunkl/error.hpp"
#include "dunkl/models.hpp"

namespace dunkl {
namespace {

void check_step_inputs(const DriftSpec& spec, std::span<const double> x_prev, std::span<const double> dB, double dt) {
  const auto d = static_cast<std::size_t>(spec.dim());
  if (x_prev.size() != d || dB.size() != d) throw Error(ErrorCode::invalid_parameter, "step: dimension mismatch");
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_parameter, "step: dt must be > 0");
}

// x_prev + dB + b(t_prev, x_prev) dt
void explicit_part(const DriftSpec& spec, std::span<const double> x_prev, std::span<const double> dB, double t_prev,
                   double dt, Vector& rhs) {
  const std::size_t d = x_prev.size();
  rhs.resize(d);
  if (spec.extra().is_zero()) {
    for (std::size_t i = 0; i < d; ++i) rhs[i] = x_prev[i] + dB[i];
    return;
  }
  std::fill(rhs.begin(), rhs.end(), 0.0);
  spec.extra().add_to(t_prev, x_prev, rhs);
  for (std::size_t i = 0; i < d; ++i) rhs[i] = x_prev[i] + dB[i] + rhs[i] * dt;
}

const SchemeConfig& validated(const SchemeConfig& config, const RootSystem& rs) {
  config.validate(rs);
  return config;
}

}  // namespace

const char* to_string(Variant v) noexcept {
  return v == Variant::semi_implicit ? "semi_implicit" : "truncated";
}

double SchemeConfig::epsilon(const RootSystem& rs) const {
  if (eps_rule.kind == EpsRule::Kind::fixed) return eps_rule.value;
  const double lk = rs.lipschitz_scale();
  // With L_k = 0 the drift vanishes and any eps is admissible.
  return std::sqrt(eps_rule.value * (lk > 0.0 ? lk : 1.0) * dt());
}

void SchemeConfig::validate(const RootSystem& rs) const {
  if (n_steps < 1) throw Error(ErrorCode::configuration, "n_steps must be >= 1 (no scheme on an empty grid)");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::configuration, "horizon T must be > 0");
  if (!(solver_tol > 0.0)) throw Error(ErrorCode::configuration, "solver_tol must be > 0");
  if (!(initial_margin >= 0.0)) throw Error(ErrorCode::configuration, "initial_margin must be >= 0");
  if (variant != Variant::truncated) return;
  if (eps_rule.kind == EpsRule::Kind::scaled && !(eps_rule.value > 1.0))
    throw Error(ErrorCode::configuration, "scaled eps rule needs c > 1 in eps = sqrt(c L_k dt)");
  if (eps_rule.kind == EpsRule::Kind::fixed && !(eps_rule.value > 0.0))
    throw Error(ErrorCode::configuration, "fixed eps must be > 0");
  check_contraction(rs, dt(), epsilon(rs));
}

Vector step_semi_implicit(const DriftSpec& spec, std::span<const double> x_prev, std::span<const double> dB,
                          double t_prev, double dt) {
  check_step_inputs(spec, x_prev, dB, dt);
  Vector rhs;
  explicit_part(spec, x_prev, dB, t_prev, dt, rhs);
  ImplicitStepSolver solver(spec.root_system());
  SolveResult r;
  solver.solve_exact(rhs, dt, r);
  return r.y;
}

Vector step_truncated(const DriftSpec& spec, std::span<const double> x_prev, std::span<const double> dB,
                      double t_prev, double dt, double eps) {
  check_step_inputs(spec, x_prev, dB, dt);
  check_contraction(spec.root_system(), dt, eps);
  Vector rhs;
  explicit_part(spec, x_prev, dB, t_prev, dt, rhs);
  ImplicitStepSolver solver(spec.root_system());
  SolveResult r;
  solver.solve_truncated(rhs, dt, eps, r);
  return r.y;
}

PathSimulator::PathSimulator(const ModelSpec& model, const SchemeConfig& config)
    : model_(&model),
      config_(validated(config, model.root_system())),
      solver_(model.root_system(), SolverSettings{config.solver_tol, 200, 50}) {
  const RootSystem& rs = model.root_system();
  if (!rs.in_chamber(model.x0, config_.initial_margin))
    throw Error(ErrorCode::configuration, "initial condition is not inside the chamber with the requested margin");
  if (config_.variant == Variant::truncated) {
    eps_ = config_.epsilon(rs);
    if (!(rs.min_pairing(model.x0) > eps_))
      throw Error(ErrorCode::configuration,
                  "truncated scheme requires eps in (0, min <a, x(0)>); got eps=" + std::to_string(eps_) +
                      ", min <a, x(0)>=" + std::to_string(rs.min_pairing(model.x0)));
  }
}

void PathSimulator::run(std::span<const double> increments, Path& out) {
  const auto d = static_cast<std::size_t>(model_->dim());
  const auto n = static_cast<std::size_t>(config_.n_steps);
  if (increments.size() != n * d)
    throw Error(ErrorCode::configuration, "increments must hold n_steps x d values (got " +
                                              std::to_string(increments.size()) + ", expected " +
                                              std::to_string(n * d) + ")");
  const double dt = config_.dt();
  const DriftSpec& spec = model_->drift;
  out.dim = static_cast<int>(d);
  out.times.resize(n + 1);
  out.data.resize((n + 1) * d);
  out.stats = {};
  for (std::size_t l = 0; l <= n; ++l)
    out.times[l] = config_.horizon * static_cast<double>(l) / static_cast<double>(n);
  std::copy(model_->x0.begin(), model_->x0.end(), out.data.begin());

  for (std::size_t l = 0; l < n; ++l) {
    const auto x_prev = out.state(l);
    try {
      explicit_part(spec, x_prev, increments.subspan(l * d, d), out.times[l], dt, rhs_);
      if (config_.variant == Variant::semi_implicit)
        solver_.solve_exact(rhs_, dt, result_);
      else
        solver_.solve_truncated(rhs_, dt, eps_, result_);
    } catch (const Error& e) {
      throw PathError(std::string("step ") + std::to_string(l) + ": " + e.what(), -1, static_cast<std::int64_t>(l));
    }
    std::copy(result_.y.begin(), result_.y.end(), out.state(l + 1).begin());
    out.stats.solver_iterations += result_.iterations;
    out.stats.max_iterations = std::max(out.stats.max_iterations, result_.iterations);
    switch (result_.method) {
      case SolveMethod::closed_form: ++out.stats.closed_form; break;
      case SolveMethod::fixed_point: ++out.stats.fixed_point; break;
      case SolveMethod::continuation_newton: ++out.stats.newton; break;
    }
  }
}

Path simulate_path(const ModelSpec& model, const SchemeConfig& config, std::span<const double> increments) {
  PathSimulator sim(model, config);
  Path path;
  sim.run(increments, path);
  return path;
}

void write_path_csv(std::ostream& os, const Path& path) {
  os << 't';
  for (int i = 1; i <= path.dim; ++i) os << ",x" << i;
  os << '\n';
  char buf[32];
  for (std::size_t l = 0; l < path.size(); ++l) {
    std::snprintf(buf, sizeof buf, "%.17g", path.times[l]);
    os << buf;
    for (double v : path.state(l)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace dunkl
