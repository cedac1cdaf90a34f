#include "dunkl/models.hpp"

#include "dunkl/error.hpp"

namespace dunkl {
namespace {

ModelSpec make_model(RootSystem rs, BoundedDrift extra, std::optional<Vector> x0, Vector default_x0, std::string label,
               Transform transform) {
  Vector start = x0 ? *x0 : std::move(default_x0);
  if (start.size() != static_cast<std::size_t>(rs.dim()))
    throw Error(ErrorCode::configuration, label + ": x0 has dimension " + std::to_string(start.size()) +
                                              ", expected " + std::to_string(rs.dim()));
  if (!rs.in_chamber(start, 0.0))
    throw Error(ErrorCode::configuration, label + ": x0 must lie strictly inside the Weyl chamber");
  TheoryFlags flags = theory_flags(rs);
  DriftSpec drift(std::move(rs), std::move(extra));
  return ModelSpec{std::move(drift), std::move(start), std::move(label), transform, flags};
}

int require_dim(const PresetParams& p, std::string_view name, int fallback, int minimum) {
  const int d = p.d.value_or(fallback);
  if (d < minimum)
    throw Error(ErrorCode::invalid_parameter,
                std::string(name) + ": dimension d must be >= " + std::to_string(minimum));
  return d;
}

Vector bcd_default_x0(int d) {
  Vector x(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) x[i] = d - i;
  return x;
}

}  // namespace

TheoryFlags theory_flags(const RootSystem& rs) {
  TheoryFlags f;
  const double nu = rs.min_nu();
  f.multiplicity_below_half = nu < 0.0;
  f.order_half = nu >= 3.0;
  f.order_one = nu >= 16.0;
  f.truncated_rate = nu > 6.0;
  return f;
}

ModelSpec preset(std::string_view name, const PresetParams& p) {
  if (name == "bessel") {
    if (p.d && *p.d != 1) throw Error(ErrorCode::invalid_parameter, "bessel: dimension is always 1");
    return make_model(RootSystem::bessel(p.k), p.extra, p.x0, {1.0}, "bessel", Transform::none);
  }
  if (name == "dyson" || name == "heckman_opdam") {
    const int d = require_dim(p, name, 3, 2);
    Vector x0(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x0[i] = 0.5 * (d - 1 - 2 * i);  // (d + 1 - 2i)/2 with 1-based i
    RootSystem rs = RootSystem::type_a(d, p.k);
    BoundedDrift extra = name == "dyson" ? p.extra : BoundedDrift::heckman_opdam(rs);
    return make_model(std::move(rs), std::move(extra), p.x0, std::move(x0), std::string(name), Transform::none);
  }
  if (name == "type_b" || name == "type_c" || name == "type_d") {
    const int r = name == "type_b" ? 1 : name == "type_c" ? 2 : 0;
    if (p.r && *p.r != r) throw Error(ErrorCode::invalid_parameter, std::string(name) + ": r is fixed by the type");
    const int d = require_dim(p, name, 3, 2);
    return make_model(RootSystem::type_bcd(d, p.k, r), p.extra, p.x0, bcd_default_x0(d), std::string(name),
                Transform::none);
  }
  if (name == "wishart") {
    const int d = require_dim(p, name, 2, 2);
    const int r = p.r.value_or(1);
    return make_model(RootSystem::type_bcd(d, p.k, r), p.extra, p.x0, bcd_default_x0(d), "wishart",
                Transform::square_components);
  }
  throw Error(ErrorCode::invalid_parameter,
              "unknown preset '" + std::string(name) +
                  "' (expected bessel, dyson, type_b, type_c, type_d, wishart, heckman_opdam)");
}

ModelSpec custom_model(RootSystem rs, std::optional<Vector> x0, BoundedDrift extra, std::string label) {
  const auto w = rs.witness();
  Vector fallback(w.begin(), w.end());
  return make_model(std::move(rs), std::move(extra), std::move(x0), std::move(fallback), std::move(label),
              Transform::none);
}

Path wishart_transform(const Path& path) {
  Path out = path;
  for (double& v : out.data) v *= v;
  return out;
}

}  // namespace dunkl
