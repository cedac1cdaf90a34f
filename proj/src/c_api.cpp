#include "dunkl/dunkl.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "dunkl/coeff.hpp"
#include "dunkl/error.hpp"
#include "dunkl/models.hpp"
#include "dunkl/rng.hpp"
#include "dunkl/run.hpp"
#include "dunkl/scheme.hpp"
#include "dunkl/solver.hpp"

struct dunkl_root_system {
  dunkl::RootSystem rs;
};

struct dunkl_model {
  dunkl::ModelSpec spec;
};

namespace {

thread_local std::string g_last_error;

template <class F>
dunkl_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return DUNKL_OK;
  } catch (const dunkl::Error& e) {
    g_last_error = e.what();
    return static_cast<dunkl_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DUNKL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DUNKL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw dunkl::Error(dunkl::ErrorCode::invalid_parameter, std::string(what) + " must not be NULL");
}

std::span<const double> in_vec(const double* x, std::size_t n) {
  require(x, "input vector");
  return {x, n};
}

void copy_out(const dunkl::Vector& v, double* out) {
  require(out, "output pointer");
  std::copy(v.begin(), v.end(), out);
}

std::size_t dim_of(const dunkl_root_system* rs) {
  require(rs, "root system");
  return static_cast<std::size_t>(rs->rs.dim());
}

dunkl::SchemeConfig to_config(const dunkl_scheme& s) {
  dunkl::SchemeConfig c;
  if (s.variant != DUNKL_SEMI_IMPLICIT && s.variant != DUNKL_TRUNCATED)
    throw dunkl::Error(dunkl::ErrorCode::invalid_parameter, "unknown scheme variant");
  c.variant = s.variant == DUNKL_TRUNCATED ? dunkl::Variant::truncated : dunkl::Variant::semi_implicit;
  c.n_steps = s.n_steps;
  c.horizon = s.horizon;
  c.eps_rule = s.eps_kind == DUNKL_EPS_FIXED ? dunkl::EpsRule::fixed(s.eps_value) : dunkl::EpsRule::scaled(s.eps_value);
  c.solver_tol = s.solver_tol;
  c.initial_margin = s.initial_margin;
  return c;
}

}  // namespace

extern "C" {

const char* dunkl_last_error(void) { return g_last_error.c_str(); }

const char* dunkl_status_string(dunkl_status status) {
  if (status == DUNKL_OK) return "ok";
  if (status == DUNKL_ERR_INTERNAL) return "internal";
  if (status < DUNKL_OK || status > DUNKL_ERR_INTERNAL) return "unknown";
  return dunkl::to_string(static_cast<dunkl::ErrorCode>(status));
}

const char* dunkl_version(void) { return "0.1.0"; }

dunkl_status dunkl_rs_bessel(double k, dunkl_root_system** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dunkl_root_system{dunkl::RootSystem::bessel(k)};
  });
}

dunkl_status dunkl_rs_type_a(int d, double k, dunkl_root_system** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dunkl_root_system{dunkl::RootSystem::type_a(d, k)};
  });
}

dunkl_status dunkl_rs_type_bcd(int d, double k, int r, dunkl_root_system** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dunkl_root_system{dunkl::RootSystem::type_bcd(d, k, r)};
  });
}

dunkl_status dunkl_rs_custom(int dim, size_t n_roots, const double* roots, const double* mult,
                             dunkl_root_system** out) {
  return guarded([&] {
    require(out, "out");
    if (dim < 1) throw dunkl::Error(dunkl::ErrorCode::invalid_parameter, "dim must be >= 1");
    const auto d = static_cast<std::size_t>(dim);
    const auto flat = in_vec(roots, n_roots * d);
    const auto k = in_vec(mult, n_roots);
    std::vector<dunkl::Vector> rows;
    for (std::size_t i = 0; i < n_roots; ++i) rows.emplace_back(flat.begin() + i * d, flat.begin() + (i + 1) * d);
    *out = new dunkl_root_system{dunkl::RootSystem::custom(dim, rows, {k.begin(), k.end()})};
  });
}

dunkl_status dunkl_rs_from_json(const char* json, dunkl_root_system** out) {
  return guarded([&] {
    require(out, "out");
    require(json, "json");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw dunkl::Error(dunkl::ErrorCode::schema, e.what());
    }
    *out = new dunkl_root_system{dunkl::RootSystem::from_json(doc)};
  });
}

void dunkl_rs_free(dunkl_root_system* rs) { delete rs; }

int dunkl_rs_dim(const dunkl_root_system* rs) { return rs ? rs->rs.dim() : 0; }

size_t dunkl_rs_size(const dunkl_root_system* rs) { return rs ? rs->rs.size() : 0; }

dunkl_status dunkl_rs_roots(const dunkl_root_system* rs, double* out) {
  return guarded([&] {
    require(rs, "root system");
    require(out, "out");
    const auto data = rs->rs.root_data();
    std::copy(data.begin(), data.end(), out);
  });
}

dunkl_status dunkl_rs_constants(const dunkl_root_system* rs, double* gamma, double* lipschitz_scale) {
  return guarded([&] {
    require(rs, "root system");
    if (gamma) *gamma = rs->rs.gamma();
    if (lipschitz_scale) *lipschitz_scale = rs->rs.lipschitz_scale();
  });
}

dunkl_status dunkl_reflect(const double* alpha, const double* x, int d, double* out) {
  return guarded([&] {
    if (d < 1) throw dunkl::Error(dunkl::ErrorCode::invalid_parameter, "d must be >= 1");
    const auto n = static_cast<std::size_t>(d);
    copy_out(dunkl::reflect(in_vec(alpha, n), in_vec(x, n)), out);
  });
}

dunkl_status dunkl_rs_in_chamber(const dunkl_root_system* rs, const double* x, double margin, int* out) {
  return guarded([&] {
    require(out, "out");
    *out = rs->rs.in_chamber(in_vec(x, dim_of(rs)), margin) ? 1 : 0;
  });
}

dunkl_status dunkl_rs_alternating_poly(const dunkl_root_system* rs, const double* x, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = rs->rs.alternating_poly(in_vec(x, dim_of(rs)));
  });
}

dunkl_status dunkl_rs_harmonic_residual(const dunkl_root_system* rs, const double* x, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = rs->rs.harmonic_identity_residual(in_vec(x, dim_of(rs)));
  });
}

dunkl_status dunkl_fk(const dunkl_root_system* rs, const double* x, double* out) {
  return guarded([&] {
    const auto d = dim_of(rs);
    copy_out(dunkl::DriftSpec(rs->rs).fk(in_vec(x, d)), out);
  });
}

dunkl_status dunkl_fk_eps(const dunkl_root_system* rs, const double* x, double eps, double* out) {
  return guarded([&] {
    const auto d = dim_of(rs);
    copy_out(dunkl::DriftSpec(rs->rs).fk_eps(in_vec(x, d), eps), out);
  });
}

dunkl_status dunkl_g_eps(double x, double eps, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = dunkl::g_eps(x, eps);
  });
}

dunkl_status dunkl_solve_exact(const dunkl_root_system* rs, const double* x, double h, double tol, double* y,
                               int* iterations) {
  return guarded([&] {
    const auto r = dunkl::solve_exact(rs->rs, in_vec(x, dim_of(rs)), h, tol);
    copy_out(r.y, y);
    if (iterations) *iterations = r.iterations;
  });
}

dunkl_status dunkl_solve_truncated(const dunkl_root_system* rs, const double* x, double h, double eps, double tol,
                                   double* y, int* iterations) {
  return guarded([&] {
    const auto r = dunkl::solve_truncated(rs->rs, in_vec(x, dim_of(rs)), h, eps, tol);
    copy_out(r.y, y);
    if (iterations) *iterations = r.iterations;
  });
}

dunkl_status dunkl_iteration_error_bound(const dunkl_root_system* rs, double h, double eps, int n, double* out) {
  return guarded([&] {
    require(rs, "root system");
    require(out, "out");
    *out = dunkl::iteration_error_bound(rs->rs, h, eps, n);
  });
}

dunkl_status dunkl_model_preset(const char* name, int d, double k, int r, const double* x0, dunkl_model** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    dunkl::PresetParams p;
    if (d > 0) p.d = d;
    p.k = k;
    if (r >= 0) p.r = r;
    if (x0) {
      const int dim = d > 0 ? d : (std::strcmp(name, "bessel") == 0 ? 1 : std::strcmp(name, "wishart") == 0 ? 2 : 3);
      p.x0 = dunkl::Vector(x0, x0 + dim);
    }
    *out = new dunkl_model{dunkl::preset(name, p)};
  });
}

dunkl_status dunkl_model_custom(const dunkl_root_system* rs, const double* x0, dunkl_model** out) {
  return guarded([&] {
    require(out, "out");
    const auto d = dim_of(rs);
    std::optional<dunkl::Vector> start;
    if (x0) start = dunkl::Vector(x0, x0 + d);
    *out = new dunkl_model{dunkl::custom_model(rs->rs, start)};
  });
}

void dunkl_model_free(dunkl_model* model) { delete model; }

int dunkl_model_dim(const dunkl_model* model) { return model ? model->spec.dim() : 0; }

dunkl_status dunkl_model_x0(const dunkl_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    copy_out(model->spec.x0, out);
  });
}

void dunkl_scheme_default(dunkl_scheme* scheme) {
  if (!scheme) return;
  const dunkl::SchemeConfig c;
  scheme->variant = DUNKL_SEMI_IMPLICIT;
  scheme->n_steps = 1024;
  scheme->horizon = c.horizon;
  scheme->eps_kind = DUNKL_EPS_SCALED;
  scheme->eps_value = c.eps_rule.value;
  scheme->solver_tol = c.solver_tol;
  scheme->initial_margin = c.initial_margin;
}

dunkl_status dunkl_simulate(const dunkl_model* model, const dunkl_scheme* scheme, const double* increments,
                            double* states) {
  return guarded([&] {
    require(model, "model");
    require(scheme, "scheme");
    require(states, "states");
    const auto config = to_config(*scheme);
    const auto d = static_cast<std::size_t>(model->spec.dim());
    dunkl::PathSimulator sim(model->spec, config);
    dunkl::Path path;
    sim.run(in_vec(increments, static_cast<std::size_t>(config.n_steps) * d), path);
    std::copy(path.data.begin(), path.data.end(), states);
  });
}

dunkl_status dunkl_brownian_increments(uint64_t seed, uint64_t path_index, int64_t n_steps, double horizon, int d,
                                       double* out) {
  return guarded([&] {
    require(out, "out");
    dunkl::BrownianLattice lattice(seed, path_index, n_steps, horizon, d);
    lattice.fine_increments({out, static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(d)});
  });
}

dunkl_status dunkl_run(const char* config_path, const char* command, const char* output, int threads, int has_seed,
                       uint64_t seed, int* exit_code) {
  return guarded([&] {
    require(config_path, "config_path");
    require(exit_code, "exit_code");
    dunkl::RunOptions opt;
    if (command) {
      opt.command = dunkl::parse_command(command);
      if (!opt.command) throw dunkl::Error(dunkl::ErrorCode::invalid_parameter, std::string("unknown command ") + command);
    }
    if (output) opt.output = output;
    if (has_seed) opt.seed = seed;
    opt.threads = threads;
    const auto outcome = dunkl::run(config_path, opt);
    *exit_code = outcome.exit_code;
    g_last_error = outcome.message;
  });
}

}  // extern "C"
