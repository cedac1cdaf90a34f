#include "dunkl/identities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dunkl/coeff.hpp"
#include "dunkl/error.hpp"
#include "dunkl/rng.hpp"

namespace dunkl {
namespace {

// Sample streams; the step slot of the counter separates independent families.
enum Stream : std::uint32_t { kChamberA = 0, kChamberB = 1 << 20, kFreeA = 2 << 20, kFreeB = 3 << 20, kScalar = 4 << 20 };

Vector gaussian(const RootSystem& rs, std::uint64_t seed, std::uint64_t index, std::uint32_t stream, double scale) {
  Vector x(static_cast<std::size_t>(rs.dim()));
  for (std::size_t c = 0; c < x.size(); ++c)
    x[c] = scale * standard_normal(seed, index, stream, static_cast<std::uint32_t>(c));
  return x;
}

class Tracker {
 public:
  explicit Tracker(std::string name) { r_.name = std::move(name); }
  void check(double lhs, double rhs) {
    const double excess = lhs - rhs;
    ++r_.samples;
    if (!(excess <= 0.0)) r_.passed = false;
    if (std::isnan(excess)) r_.worst = std::numeric_limits<double>::quiet_NaN();
    else if (!std::isnan(r_.worst)) r_.worst = std::max(r_.worst, excess);
  }
  PropertyResult result() const { return r_; }

 private:
  PropertyResult r_;
};

Vector sub(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "[eps=%g]", eps);
  return buf;
}

}  // namespace

double fd_laplacian_poly(const RootSystem& rs, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_parameter, "fd_laplacian_poly: step must be > 0");
  Vector p(x.begin(), x.end());
  const double centre = rs.alternating_poly(x);
  double lap = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double xi = p[i];
    auto at = [&](double offset) {
      p[i] = xi + offset;
      return rs.alternating_poly(p);
    };
    const double f2p = at(2 * h), f1p = at(h), f1m = at(-h), f2m = at(-2 * h);
    p[i] = xi;
    lap += (-f2p + 16.0 * f1p - 30.0 * centre + 16.0 * f1m - f2m) / (12.0 * h * h);
  }
  return lap;
}

std::vector<Vector> random_chamber_points(const RootSystem& rs, std::int64_t count, std::uint64_t seed,
                                          double scale) {
  if (count < 0) throw Error(ErrorCode::invalid_parameter, "random_chamber_points: negative count");
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t index = 0; pts.size() < static_cast<std::size_t>(count); ++index) {
    Vector x = rs.fold_into_chamber(gaussian(rs, seed, index, kChamberA, scale));
    if (rs.in_chamber(x)) pts.push_back(std::move(x));
  }
  return pts;
}

std::vector<PropertyResult> invariant_suite(const RootSystem& rs, const InvariantOptions& opt) {
  if (opt.points < 1) throw Error(ErrorCode::invalid_parameter, "invariant_suite: need at least one point");
  for (double eps : opt.eps_values)
    if (!(eps > 0.0)) throw Error(ErrorCode::invalid_parameter, "invariant_suite: eps values must be > 0");

  const DriftSpec spec(rs);
  const auto xs = random_chamber_points(rs, opt.points, opt.seed, opt.scale);
  const auto ys = random_chamber_points(rs, opt.points, opt.seed ^ 0x9E3779B97F4A7C15ull, opt.scale);
  const double gamma = rs.gamma();
  const double lk = rs.lipschitz_scale();
  const double r_plus = static_cast<double>(rs.size());

  std::vector<PropertyResult> out;

  Tracker harmonic("harmonic_sum_identity"), laplacian("alternating_poly_harmonic"), euler("euler_identity"),
      osl("one_sided_lipschitz"), ho("heckman_opdam_bound");
  const double ho_bound = 0.5 * rs.weighted_norm_sum();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& x = xs[i];
    harmonic.check(rs.harmonic_identity_residual(x), 1e-10);
    laplacian.check(std::abs(fd_laplacian_poly(rs, x, opt.fd_step)), 1e-6 * (1.0 + std::abs(rs.alternating_poly(x))));

    const Vector fx = spec.fk(x);
    double ip = 0.0, mag = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      ip += x[c] * fx[c];
      mag += std::abs(x[c] * fx[c]);
    }
    euler.check(std::abs(ip - gamma), 1e-12 * (1.0 + mag));

    const Vector fy = spec.fk(ys[i]);
    const Vector dx = sub(x, ys[i]);
    const double dist2 = dot(dx, dx);
    osl.check(dot(dx, sub(fx, fy)), 1e-12 * (1.0 + dist2));

    ho.check(norm(heckman_opdam_drift(rs, 0.0, x)), ho_bound * (1.0 + 1e-12));
  }
  out.push_back(harmonic.result());
  out.push_back(laplacian.result());
  out.push_back(euler.result());
  out.push_back(osl.result());

  for (double eps : opt.eps_values) {
    const std::string tag = eps_tag(eps);
    Tracker mono("truncated_drift_monotone" + tag), lip("truncated_drift_lipschitz" + tag),
        radial("truncated_drift_radial_bound" + tag), trunc("truncation_error_bound" + tag),
        g_lip("g_eps_lipschitz" + tag), g_mono("g_eps_monotone" + tag), g_gap("g_eps_gap" + tag);
    const double lip_const = lk / (eps * eps);
    for (std::int64_t i = 0; i < opt.points; ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      const Vector x = gaussian(rs, opt.seed, idx, kFreeA, 2.0 * opt.scale);
      const Vector y = gaussian(rs, opt.seed, idx, kFreeB, 2.0 * opt.scale);
      const Vector fx = spec.fk_eps(x, eps);
      const Vector fy = spec.fk_eps(y, eps);
      const Vector dx = sub(x, y);
      const Vector df = sub(fx, fy);
      const double dist = norm(dx);
      mono.check(dot(dx, df), 1e-12 * (1.0 + dist * dist));
      lip.check(norm(df), lip_const * dist * (1.0 + 1e-12));
      radial.check(dot(x, fx), gamma + 1e-12 * (1.0 + gamma));

      const auto& z = xs[static_cast<std::size_t>(i)];
      const Vector gap = sub(spec.fk(z), spec.fk_eps(z, eps));
      double rhs = 0.0;
      for (std::size_t a = 0; a < rs.size(); ++a) {
        const double s = dot(rs.root(a), z);
        const double k = rs.multiplicity(a);
        rhs += k * k * rs.root_norm_sq(a) / (s * s * s * s);
      }
      rhs *= eps * eps * r_plus;
      trunc.check(dot(gap, gap), rhs * (1.0 + 1e-12));

      const double u = 2.0 * opt.scale * standard_normal(opt.seed, idx, kScalar, 0);
      const double v = 2.0 * opt.scale * standard_normal(opt.seed, idx, kScalar, 1);
      const double gu = g_eps(u, eps), gv = g_eps(v, eps);
      g_lip.check(std::abs(gu - gv), std::abs(u - v) / (eps * eps) * (1.0 + 1e-12));
      g_mono.check((u - v) * (gu - gv), 0.0);
      const double w = std::abs(u) + 1e-3;
      const double diff = 1.0 / w - g_eps(w, eps);
      g_gap.check(-diff, 0.0);
      g_gap.check(diff, eps / (w * w) * (1.0 + 1e-12));
    }
    for (auto* t : {&mono, &lip, &radial, &trunc, &g_lip, &g_mono, &g_gap}) out.push_back(t->result());
  }
  out.push_back(ho.result());
  return out;
}

nlohmann::json to_json(const std::vector<PropertyResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name},
                   {"passed", r.passed},
                   {"samples", r.samples},
                   {"worst_excess", std::isfinite(r.worst) ? nlohmann::json(r.worst) : nlohmann::json(nullptr)}});
  }
  return arr;
}

}  // namespace dunkl
