#include "dunkl/coeff.hpp"

#include <cmath>

#include "dunkl/error.hpp"

namespace dunkl {

double g_eps(double x, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_parameter, "g_eps: truncation level eps must be > 0");
  return 1.0 / std::max(x, eps);
}

double coth_minus_inverse(double u) {
  const double a = std::abs(u);
  if (a < 2.0) {
    // Direct evaluation cancels near 0; Lambert's continued fraction u/(3 + u^2/(5 + u^2/(7 + ...))) instead.
    const double u2 = u * u;
    double tail = 31.0;
    for (int m = 29; m >= 3; m -= 2) tail = m + u2 / tail;
    return u / tail;
  }
  if (a > 20.0) return std::copysign(1.0, u) - 1.0 / u;  // coth(u) == +-1 to double precision
  return 1.0 / std::tanh(u) - 1.0 / u;
}

const char* to_string(DriftKind kind) noexcept {
  switch (kind) {
    case DriftKind::none: return "none";
    case DriftKind::constant: return "constant";
    case DriftKind::heckman_opdam: return "heckman_opdam";
    case DriftKind::user_callback: return "user_callback";
  }
  return "?";
}

const char* to_string(Smoothness s) noexcept {
  switch (s) {
    case Smoothness::measurable: return "measurable";
    case Smoothness::lipschitz_holder: return "lipschitz_holder";
    case Smoothness::c12_bounded: return "c12_bounded";
  }
  return "?";
}

BoundedDrift BoundedDrift::none() { return {}; }

BoundedDrift BoundedDrift::constant(Vector value) {
  for (double v : value)
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_parameter, "constant drift must be finite");
  BoundedDrift b;
  b.kind_ = DriftKind::constant;
  b.bound_ = norm(value);
  b.lipschitz_ = 0.0;
  b.smoothness_ = Smoothness::c12_bounded;
  b.constant_ = std::move(value);
  return b;
}

BoundedDrift BoundedDrift::heckman_opdam(const RootSystem& rs) {
  BoundedDrift b;
  b.kind_ = DriftKind::heckman_opdam;
  b.rs_ = std::make_shared<const RootSystem>(rs);
  // |phi| < 1 and 0 < phi' <= 1/3 on (0, inf); chain rule gives the factor 1/4 in the Lipschitz bound.
  b.bound_ = 0.5 * rs.weighted_norm_sum();
  double lip = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) lip += rs.multiplicity(i) * rs.root_norm_sq(i) / 12.0;
  b.lipschitz_ = lip;
  b.smoothness_ = Smoothness::c12_bounded;
  return b;
}

BoundedDrift BoundedDrift::user(DriftCallback fn, double declared_bound, double declared_lipschitz,
                                Smoothness smoothness) {
  if (!fn) throw Error(ErrorCode::invalid_parameter, "user drift: callback is empty");
  if (!(declared_bound >= 0.0) || !(declared_lipschitz >= 0.0))
    throw Error(ErrorCode::invalid_parameter, "user drift: declared bound and Lipschitz constant must be >= 0");
  BoundedDrift b;
  b.kind_ = DriftKind::user_callback;
  b.fn_ = std::move(fn);
  b.bound_ = declared_bound;
  b.lipschitz_ = declared_lipschitz;
  b.smoothness_ = smoothness;
  return b;
}

void BoundedDrift::add_to(double t, std::span<const double> x, std::span<double> out) const {
  switch (kind_) {
    case DriftKind::none: return;
    case DriftKind::constant:
      if (constant_.size() != out.size()) throw Error(ErrorCode::invalid_parameter, "constant drift: dimension mismatch");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += constant_[i];
      return;
    case DriftKind::heckman_opdam: {
      const Vector b = heckman_opdam_drift(*rs_, t, x);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
      return;
    }
    case DriftKind::user_callback: {
      Vector b(out.size(), 0.0);
      fn_(t, x, b);
#ifndef NDEBUG
      if (norm(b) > bound_ * (1.0 + 1e-9))
        throw Error(ErrorCode::invalid_parameter, "user drift exceeds its declared bound");
#endif
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
      return;
    }
  }
}

Vector BoundedDrift::eval(double t, std::span<const double> x) const {
  Vector out(x.size(), 0.0);
  add_to(t, x, out);
  return out;
}

DriftSpec::DriftSpec(RootSystem rs, BoundedDrift extra) : rs_(std::move(rs)), extra_(std::move(extra)) {
  if (extra_.kind() == DriftKind::constant && extra_.constant_value().size() != static_cast<std::size_t>(rs_.dim()))
    throw Error(ErrorCode::invalid_parameter, "constant drift dimension does not match the root system");
}

void DriftSpec::fk_into(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = static_cast<std::size_t>(rs_.dim());
  if (x.size() != d || out.size() != d) throw Error(ErrorCode::invalid_parameter, "f_k: dimension mismatch");
  const auto roots = rs_.root_data();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < rs_.size(); ++a) {
    const double* alpha = roots.data() + a * d;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += alpha[i] * x[i];
    if (!(s > 0.0)) throw Error(ErrorCode::domain, "f_k: point is on or outside a chamber wall (drift is singular there)");
    const double c = rs_.multiplicity(a) / s;
    for (std::size_t i = 0; i < d; ++i) out[i] += c * alpha[i];
  }
}

Vector DriftSpec::fk(std::span<const double> x) const {
  Vector out(x.size());
  fk_into(x, out);
  return out;
}

void DriftSpec::fk_eps_into(std::span<const double> x, double eps, std::span<double> out) const {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_parameter, "f_k,eps: truncation level eps must be > 0");
  const std::size_t d = static_cast<std::size_t>(rs_.dim());
  if (x.size() != d || out.size() != d) throw Error(ErrorCode::invalid_parameter, "f_k,eps: dimension mismatch");
  const auto roots = rs_.root_data();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < rs_.size(); ++a) {
    const double* alpha = roots.data() + a * d;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += alpha[i] * x[i];
    const double c = rs_.multiplicity(a) / std::max(s, eps);
    for (std::size_t i = 0; i < d; ++i) out[i] += c * alpha[i];
  }
}

Vector DriftSpec::fk_eps(std::span<const double> x, double eps) const {
  Vector out(x.size());
  fk_eps_into(x, eps, out);
  return out;
}

Vector eval_fk(const DriftSpec& spec, std::span<const double> x) { return spec.fk(x); }
Vector eval_fk_eps(const DriftSpec& spec, std::span<const double> x, double eps) { return spec.fk_eps(x, eps); }

Vector heckman_opdam_drift(const RootSystem& rs, double /*t*/, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(rs.dim()))
    throw Error(ErrorCode::invalid_parameter, "Heckman-Opdam drift: dimension mismatch");
  Vector out(x.size(), 0.0);
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const auto alpha = rs.root(a);
    const double s = dot(alpha, x);
    if (!(s > 0.0)) throw Error(ErrorCode::domain, "Heckman-Opdam drift: point is not strictly inside the chamber");
    const double c = 0.5 * rs.multiplicity(a) * coth_minus_inverse(0.5 * s);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * alpha[i];
  }
  return out;
}

}  // namespace dunkl
