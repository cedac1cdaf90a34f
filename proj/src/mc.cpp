#include "dunkl/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "dunkl/error.hpp"
#include "dunkl/rng.hpp"
#include "parallel.hpp"

namespace dunkl {
namespace {

constexpr double kZ95 = 1.959963984540054;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void rethrow_with_path(const PathError& e, std::int64_t m) {
  throw PathError("path " + std::to_string(m) + ", " + e.what(), m, e.step());
}

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

void validate_study(const StudyConfig& s) {
  if (!is_power_of_two(s.n_ref)) throw Error(ErrorCode::configuration, "n_ref must be a power of two");
  if (s.n_values.empty()) throw Error(ErrorCode::configuration, "n_values must not be empty");
  for (std::size_t i = 0; i < s.n_values.size(); ++i) {
    const auto n = s.n_values[i];
    if (n < 1 || s.n_ref % n != 0)
      throw Error(ErrorCode::configuration, "every n in n_values must divide n_ref (" + std::to_string(n) + ")");
    if (i > 0 && n <= s.n_values[i - 1])
      throw Error(ErrorCode::configuration, "n_values must be strictly increasing");
  }
  if (s.n_ref / s.n_values.back() < 8) throw Error(ErrorCode::configuration, "n_ref must be >= 8 * max(n_values)");
  if (s.paths < 100) throw Error(ErrorCode::configuration, "a strong error study needs at least M = 100 paths");
  if (!(s.p >= 1.0)) throw Error(ErrorCode::configuration, "error exponent p must be >= 1");
}

double state_distance(std::span<const double> a, std::span<const double> b, bool squared_components) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = squared_components ? a[i] * a[i] - b[i] * b[i] : a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// Fraction of the total carried by the largest tenth of the samples.
double top_decile_share(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end(), std::greater<>());
  const std::size_t top = (v.size() + 9) / 10;
  double head = 0.0, total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    total += v[i];
    if (i < top) head += v[i];
  }
  return total > 0.0 ? head / total : 0.0;
}

}  // namespace

Estimate estimate_mean(std::span<const double> samples) {
  Estimate e;
  const auto m = static_cast<double>(samples.size());
  if (samples.empty()) return e;
  double sum = 0.0;
  for (double v : samples) sum += v;
  e.mean = sum / m;
  if (samples.size() < 2) return e;
  double ss = 0.0;
  for (double v : samples) ss += (v - e.mean) * (v - e.mean);
  e.std_error = std::sqrt(ss / (m - 1.0) / m);
  return e;
}

LogLogFit fit_loglog(std::span<const double> n, std::span<const double> err, std::span<const double> se) {
  if (n.size() != err.size() || n.size() < 2)
    throw Error(ErrorCode::invalid_parameter, "fit_loglog: need at least two (n, error) points");
  LogLogFit fit;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (double e : err)
    if (!(e > 0.0)) {
      fit.slope = fit.intercept = fit.slope_se = fit.ci_low = fit.ci_high = nan;
      return fit;
    }
  bool weighted = se.size() == err.size();
  for (double s : se) weighted = weighted && s > 0.0;

  const std::size_t k = n.size();
  std::vector<double> x(k), y(k), w(k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(n[i]);
    y[i] = std::log(err[i]);
    if (weighted) w[i] = (err[i] / se[i]) * (err[i] / se[i]);
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  const double b = sxy / sxx;
  const double a = ybar - b * xbar;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) chi2 += w[i] * (y[i] - a - b * x[i]) * (y[i] - a - b * x[i]);
  const double dof = static_cast<double>(k) - 2.0;
  double var_b;
  if (weighted) {
    // Known per-point variances; inflate when the scatter exceeds them (pre-asymptotic curvature).
    const double scale = dof > 0.0 ? std::max(1.0, chi2 / dof) : 1.0;
    var_b = scale / sxx;
  } else {
    var_b = dof > 0.0 ? chi2 / dof / sxx : 0.0;
  }
  fit.slope = -b;
  fit.intercept = a;
  fit.slope_se = std::sqrt(var_b);
  fit.ci_low = fit.slope - kZ95 * fit.slope_se;
  fit.ci_high = fit.slope + kZ95 * fit.slope_se;
  return fit;
}

ConvergenceReport strong_error_study(const ModelSpec& model, const SchemeConfig& scheme, const StudyConfig& study) {
  validate_study(study);
  const std::size_t n_res = study.n_values.size();
  const auto d = static_cast<std::size_t>(model.dim());
  const bool squared = model.transform == Transform::square_components;

  std::vector<SchemeConfig> configs;
  for (auto n : study.n_values) {
    SchemeConfig c = scheme;
    c.n_steps = n;
    configs.push_back(c);
  }
  SchemeConfig ref_config = scheme;
  ref_config.n_steps = study.n_ref;
  // Surface configuration errors before any worker starts.
  for (const auto& c : configs) PathSimulator(model, c);
  PathSimulator probe(model, ref_config);

  // sup-errors, indexed [path * n_res + resolution]
  std::vector<double> sup_err(static_cast<std::size_t>(study.paths) * n_res);

  detail::for_each_index(study.paths, study.threads, [&] {
    struct Worker {
      const ModelSpec& model;
      const StudyConfig& study;
      std::vector<PathSimulator> coarse;
      PathSimulator reference;
      std::vector<double> fine, incr;
      Path ref_path, path;
      std::vector<double>& out;
      std::size_t d;
      bool squared;

      void operator()(std::int64_t m) {
        const BrownianLattice lattice(study.seed, static_cast<std::uint64_t>(m), study.n_ref, reference.config().horizon,
                                      static_cast<int>(d));
        lattice.fine_increments(fine);
        try {
          reference.run(fine, ref_path);
          for (std::size_t r = 0; r < coarse.size(); ++r) {
            const std::int64_t n = study.n_values[r];
            incr.resize(static_cast<std::size_t>(n) * d);
            lattice.coarse_increments(fine, n, incr);
            coarse[r].run(incr, path);
            const auto stride = static_cast<std::size_t>(study.n_ref / n);
            double sup = 0.0;
            for (std::size_t l = 1; l <= static_cast<std::size_t>(n); ++l)
              sup = std::max(sup, state_distance(ref_path.state(l * stride), path.state(l), squared));
            out[static_cast<std::size_t>(m) * coarse.size() + r] = sup;
          }
        } catch (const PathError& e) {
          rethrow_with_path(e, m);
        }
      }
    };
    std::vector<PathSimulator> coarse;
    for (const auto& c : configs) coarse.emplace_back(model, c);
    return Worker{model, study, std::move(coarse), PathSimulator(model, ref_config),
                  std::vector<double>(static_cast<std::size_t>(study.n_ref) * d), {}, {}, {}, sup_err, d, squared};
  });

  ConvergenceReport report;
  report.label = model.label;
  report.variant = to_string(scheme.variant);
  report.p = study.p;
  report.n_values = study.n_values;
  std::vector<double> powered(static_cast<std::size_t>(study.paths));
  for (std::size_t r = 0; r < n_res; ++r) {
    for (std::size_t m = 0; m < powered.size(); ++m) powered[m] = std::pow(sup_err[m * n_res + r], study.p);
    const Estimate e = estimate_mean(powered);
    const double err = std::pow(e.mean, 1.0 / study.p);
    // delta method for E[S^p]^{1/p}
    const double se = e.mean > 0.0 ? e.std_error * std::pow(e.mean, 1.0 / study.p - 1.0) / study.p : 0.0;
    report.errors.push_back(err);
    report.std_errors.push_back(se);
  }
  std::vector<double> ns(study.n_values.begin(), study.n_values.end());
  report.fit = fit_loglog(ns, report.errors, report.std_errors);
  return report;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "n,p,error,std_error\n";
  for (std::size_t i = 0; i < report.n_values.size(); ++i)
    os << report.n_values[i] << ',' << g17(report.p) << ',' << g17(report.errors[i]) << ','
       << g17(report.std_errors[i]) << '\n';
}

nlohmann::json report_summary(const ConvergenceReport& report) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"model", report.label},
          {"variant", report.variant},
          {"p", report.p},
          {"slope", num(report.fit.slope)},
          {"slope_ci", {num(report.fit.ci_low), num(report.fit.ci_high)}},
          {"slope_std_error", num(report.fit.slope_se)},
          {"intercept", num(report.fit.intercept)}};
}

Estimate terminal_discrepancy(const ModelSpec& model, const SchemeConfig& a, const SchemeConfig& b,
                              std::int64_t paths, std::uint64_t seed, int threads) {
  if (a.n_steps != b.n_steps || a.horizon != b.horizon)
    throw Error(ErrorCode::configuration, "terminal_discrepancy: both configurations need the same grid");
  if (paths < 1) throw Error(ErrorCode::configuration, "terminal_discrepancy: need at least one path");
  PathSimulator(model, a);
  PathSimulator(model, b);
  const auto d = static_cast<std::size_t>(model.dim());
  std::vector<double> samples(static_cast<std::size_t>(paths));
  detail::for_each_index(paths, threads, [&] {
    return [&, sa = PathSimulator(model, a), sb = PathSimulator(model, b), pa = Path{}, pb = Path{},
            incr = std::vector<double>(static_cast<std::size_t>(a.n_steps) * d)](std::int64_t m) mutable {
      BrownianLattice(seed, static_cast<std::uint64_t>(m), a.n_steps, a.horizon, static_cast<int>(d))
          .fine_increments(incr);
      try {
        sa.run(incr, pa);
        sb.run(incr, pb);
      } catch (const PathError& e) {
        rethrow_with_path(e, m);
      }
      samples[static_cast<std::size_t>(m)] = state_distance(pa.state(pa.size() - 1), pb.state(pb.size() - 1), false);
    };
  });
  return estimate_mean(samples);
}

double girsanov_weight(const Path& path, const RootSystem& rs, std::span<const double> nu) {
  if (nu.size() != rs.size()) throw Error(ErrorCode::invalid_parameter, "girsanov_weight: nu must align with R_+");
  if (path.dim != rs.dim()) throw Error(ErrorCode::invalid_parameter, "girsanov_weight: dimension mismatch");
  if (path.size() < 1) throw Error(ErrorCode::invalid_parameter, "girsanov_weight: empty path");
  const std::size_t last = path.size() - 1;
  for (std::size_t l = 0; l <= last; ++l)
    if (!rs.in_chamber(path.state(l)))
      throw Error(ErrorCode::domain, "girsanov_weight: path leaves the chamber at grid point " + std::to_string(l));
  double log_z = 0.0;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    if (nu[a] == 0.0) continue;
    const auto alpha = rs.root(a);
    double integral = 0.0;
    for (std::size_t l = 0; l < last; ++l) {
      const double s = dot(alpha, path.state(l));
      integral += (path.times[l + 1] - path.times[l]) / (s * s);
    }
    const double s0 = dot(alpha, path.state(0));
    const double s_t = dot(alpha, path.state(last));
    log_z += nu[a] * (std::log(s_t) - std::log(s0)) - 0.5 * nu[a] * nu[a] * rs.root_norm_sq(a) * integral;
  }
  return std::exp(log_z);
}

double WeightedExpectation::combined_se() const {
  return std::sqrt(direct.std_error * direct.std_error + weighted.std_error * weighted.std_error);
}

WeightedExpectation weighted_expectation(const PathFunctional& g, const GirsanovConfig& cfg) {
  if (!g) throw Error(ErrorCode::invalid_parameter, "weighted_expectation: empty functional");
  if (cfg.nu.size() != cfg.rs.size())
    throw Error(ErrorCode::invalid_parameter, "weighted_expectation: nu must align with R_+");
  if (cfg.paths < 2) throw Error(ErrorCode::configuration, "weighted_expectation: need at least two paths");
  std::vector<double> k_nu(cfg.nu.size()), k_half(cfg.nu.size(), 0.5);
  for (std::size_t a = 0; a < cfg.nu.size(); ++a) {
    if (!(cfg.nu[a] >= 0.0)) throw Error(ErrorCode::invalid_parameter, "weighted_expectation: nu must be >= 0");
    k_nu[a] = cfg.nu[a] + 0.5;
  }
  const ModelSpec target = custom_model(cfg.rs.with_multiplicities(k_nu), cfg.x0, {}, "girsanov_target");
  const ModelSpec base = custom_model(cfg.rs.with_multiplicities(k_half), cfg.x0, {}, "girsanov_base");
  SchemeConfig scheme;
  scheme.variant = Variant::semi_implicit;
  scheme.n_steps = cfg.n_steps;
  scheme.horizon = cfg.horizon;
  PathSimulator(target, scheme);

  const auto d = static_cast<std::size_t>(target.dim());
  const auto count = static_cast<std::size_t>(cfg.paths);
  std::vector<double> direct(count), weighted(count), weight(count);
  detail::for_each_index(cfg.paths, cfg.threads, [&] {
    return [&, st = PathSimulator(target, scheme), sb = PathSimulator(base, scheme), pt = Path{}, pb = Path{},
            incr = std::vector<double>(static_cast<std::size_t>(cfg.n_steps) * d)](std::int64_t m) mutable {
      BrownianLattice(cfg.seed, static_cast<std::uint64_t>(m), cfg.n_steps, cfg.horizon, static_cast<int>(d))
          .fine_increments(incr);
      try {
        st.run(incr, pt);
        sb.run(incr, pb);
      } catch (const PathError& e) {
        rethrow_with_path(e, m);
      }
      const auto i = static_cast<std::size_t>(m);
      const double z = girsanov_weight(pb, base.root_system(), cfg.nu);
      direct[i] = g(pt);
      weighted[i] = g(pb) * z;
      weight[i] = z;
    };
  });
  return {estimate_mean(direct), estimate_mean(weighted), estimate_mean(weight)};
}

std::vector<MomentRow> moment_scan(const ModelSpec& model, std::span<const double> q_list, std::int64_t paths,
                                   std::int64_t n_steps, double horizon, std::uint64_t seed, int threads) {
  for (double q : q_list)
    if (!(q >= 0.0)) throw Error(ErrorCode::configuration, "moment_scan: exponents must be >= 0");
  if (paths < 2) throw Error(ErrorCode::configuration, "moment_scan: need at least two paths");
  SchemeConfig scheme;
  scheme.variant = Variant::semi_implicit;
  scheme.n_steps = n_steps;
  scheme.horizon = horizon;
  PathSimulator(model, scheme);
  const RootSystem& rs = model.root_system();
  const auto d = static_cast<std::size_t>(model.dim());
  const std::size_t m_roots = rs.size();
  const auto count = static_cast<std::size_t>(paths);

  // Per path: sup_l |X(t_l)| and <a, X(T)> for each root.
  std::vector<double> sup_norm(count), pairings(count * m_roots);
  detail::for_each_index(paths, threads, [&] {
    return [&, sim = PathSimulator(model, scheme), path = Path{},
            incr = std::vector<double>(static_cast<std::size_t>(n_steps) * d)](std::int64_t m) mutable {
      BrownianLattice(seed, static_cast<std::uint64_t>(m), n_steps, horizon, static_cast<int>(d)).fine_increments(incr);
      try {
        sim.run(incr, path);
      } catch (const PathError& e) {
        rethrow_with_path(e, m);
      }
      const auto i = static_cast<std::size_t>(m);
      double sup = 0.0;
      for (std::size_t l = 0; l < path.size(); ++l) sup = std::max(sup, norm(path.state(l)));
      sup_norm[i] = sup;
      for (std::size_t a = 0; a < m_roots; ++a) pairings[i * m_roots + a] = dot(rs.root(a), path.state(path.size() - 1));
    };
  });

  const double min_nu = rs.min_nu();
  std::vector<MomentRow> rows;
  std::vector<double> samples(count);
  for (double q : q_list) {
    MomentRow row;
    row.kind = "sup";
    row.q = q;
    for (std::size_t i = 0; i < count; ++i) samples[i] = std::pow(sup_norm[i], q);
    row.estimate = estimate_mean(samples);
    row.stable = top_decile_share(samples) <= 0.5;
    rows.push_back(row);
    for (std::size_t a = 0; a < m_roots; ++a) {
      MomentRow inv;
      inv.kind = "inverse";
      inv.q = q;
      inv.root = static_cast<int>(a);
      for (std::size_t i = 0; i < count; ++i) samples[i] = std::pow(pairings[i * m_roots + a], -q);
      inv.estimate = estimate_mean(samples);
      inv.stable = top_decile_share(samples) <= 0.5;
      inv.in_terminal_window = q <= rs.nu(a);
      inv.in_sup_window = q >= 2.0 && q <= min_nu / 3.0;
      rows.push_back(inv);
    }
  }
  return rows;
}

void write_moments_csv(std::ostream& os, const std::vector<MomentRow>& rows) {
  os << "kind,q,root,estimate,std_error,stable,in_terminal_window,in_sup_window\n";
  for (const auto& r : rows)
    os << r.kind << ',' << g17(r.q) << ',' << r.root << ',' << g17(r.estimate.mean) << ','
       << g17(r.estimate.std_error) << ',' << (r.stable ? 1 : 0) << ',' << (r.in_terminal_window ? 1 : 0) << ','
       << (r.in_sup_window ? 1 : 0) << '\n';
}

}  // namespace dunkl
