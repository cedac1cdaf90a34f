#include "dunkl/rootsys.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dunkl/error.hpp"

namespace dunkl {
namespace {

// Coordinates closer than this are treated as equal when matching reflected roots.
constexpr double kMatchTol = 1e-9;

bool same_vector(std::span<const double> a, std::span<const double> b, double sign = 1.0) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - sign * b[i]) > kMatchTol) return false;
  return true;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Index of the positive root equal to +v or -v, or -1.
int match_root(const std::vector<Vector>& roots, std::span<const double> v) {
  for (std::size_t l = 0; l < roots.size(); ++l)
    if (same_vector(roots[l], v) || same_vector(roots[l], v, -1.0)) return static_cast<int>(l);
  return -1;
}

std::string fmt_vec(std::span<const double> v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

std::vector<double> normalized_sum(const std::vector<Vector>& roots, int dim) {
  std::vector<double> beta(static_cast<std::size_t>(dim), 0.0);
  for (const auto& a : roots) {
    const double n = norm(a);
    for (int i = 0; i < dim; ++i) beta[i] += a[i] / n;
  }
  return beta;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vector reflect(std::span<const double> alpha, std::span<const double> x) {
  if (alpha.size() != x.size())
    throw Error(ErrorCode::invalid_parameter, "reflect: dimension mismatch between root and point");
  const double n2 = dot(alpha, alpha);
  if (!(n2 > 0.0)) throw Error(ErrorCode::invalid_parameter, "reflect: zero root");
  const double c = 2.0 * dot(alpha, x) / n2;
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c * alpha[i];
  return out;
}

std::vector<AxiomViolation> RootSystem::check_axioms(int dim, const std::vector<Vector>& roots,
                                                     const std::vector<double>& mult) {
  std::vector<AxiomViolation> out;
  if (dim < 1) {
    out.push_back({"shape", -1, -1, "dimension must be positive"});
    return out;
  }
  if (roots.empty()) {
    out.push_back({"shape", -1, -1, "at least one positive root is required"});
    return out;
  }
  if (mult.size() != roots.size()) {
    out.push_back({"shape", -1, -1, "multiplicities must align with positive_roots by index"});
    return out;
  }
  bool shape_ok = true;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const int ii = static_cast<int>(i);
    if (roots[i].size() != static_cast<std::size_t>(dim)) {
      out.push_back({"shape", ii, -1, "root " + std::to_string(i) + " has wrong dimension"});
      shape_ok = false;
    } else if (!(norm(roots[i]) > 0.0) || !std::isfinite(norm(roots[i]))) {
      out.push_back({"shape", ii, -1, "root " + std::to_string(i) + " is zero or not finite"});
      shape_ok = false;
    }
    if (!(mult[i] >= 0.0) || !std::isfinite(mult[i]))
      out.push_back({"multiplicity", ii, -1, "multiplicity " + std::to_string(i) + " must be finite and >= 0"});
  }
  if (!shape_ok) return out;

  const std::size_t m = roots.size();
  // (R1): the only multiples of a root inside R are +-itself.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double c = dot(roots[i], roots[j]) / dot(roots[j], roots[j]);
      Vector scaled(roots[j]);
      for (auto& v : scaled) v *= c;
      if (!same_vector(roots[i], scaled)) continue;
      if (std::abs(std::abs(c) - 1.0) > kMatchTol || c > 0.0) {
        out.push_back({"R1", static_cast<int>(i), static_cast<int>(j),
                       "R1 violated: " + fmt_vec(roots[i]) + " is a multiple of " + fmt_vec(roots[j])});
      }
    }
  }

  // (R2) and reflection orbits on R_+ (signs are irrelevant for k since k(-a) = k(a)).
  DisjointSets orbits(m);
  bool r2_ok = true;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const Vector image = reflect(roots[i], roots[j]);
      const int l = match_root(roots, image);
      if (l < 0) {
        r2_ok = false;
        out.push_back({"R2", static_cast<int>(i), static_cast<int>(j),
                       "R2 violated: reflection of " + fmt_vec(roots[j]) + " in " + fmt_vec(roots[i]) + " gives " +
                           fmt_vec(image) + ", not in R"});
      } else {
        orbits.unite(static_cast<int>(j), l);
      }
    }
  }

  if (r2_ok) {
    std::vector<int> rep(m, -1);
    for (std::size_t j = 0; j < m; ++j) {
      const int root = orbits.find(static_cast<int>(j));
      if (rep[root] < 0) {
        rep[root] = static_cast<int>(j);
        continue;
      }
      const double ka = mult[rep[root]], kb = mult[j];
      if (std::abs(ka - kb) > 1e-12 * std::max(1.0, std::abs(ka))) {
        out.push_back({"multiplicity", rep[root], static_cast<int>(j),
                       "multiplicity not Weyl-invariant: k" + fmt_vec(roots[rep[root]]) + "=" + std::to_string(ka) +
                           " but k" + fmt_vec(roots[j]) + "=" + std::to_string(kb) + " on the same orbit"});
      }
    }
  }

  const Vector beta = normalized_sum(roots, dim);
  const double beta_norm = norm(beta);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(dot(beta, roots[i]) > 1e-12 * beta_norm * norm(roots[i]))) {
      out.push_back({"separation", static_cast<int>(i), -1,
                     "positive roots are not separated by a hyperplane: " + fmt_vec(roots[i]) +
                         " is not on the positive side"});
    }
  }
  return out;
}

RootSystem RootSystem::build(int dim, const std::vector<Vector>& roots, std::vector<double> mult, std::string name) {
  const auto violations = check_axioms(dim, roots, mult);
  if (!violations.empty()) {
    std::string msg = "invalid root system:";
    for (const auto& v : violations) msg += "\n  [" + v.axiom + "] " + v.message;
    throw Error(ErrorCode::validation, msg);
  }
  RootSystem rs;
  rs.dim_ = dim;
  rs.name_ = std::move(name);
  rs.mult_ = std::move(mult);
  const std::size_t m = roots.size();
  rs.roots_.reserve(m * static_cast<std::size_t>(dim));
  for (const auto& a : roots) rs.roots_.insert(rs.roots_.end(), a.begin(), a.end());

  double sum_k2a4 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double n2 = dot(roots[i], roots[i]);
    rs.norm_sq_.push_back(n2);
    rs.gamma_ += rs.mult_[i];
    rs.weighted_norm_sum_ += std::abs(rs.mult_[i]) * std::sqrt(n2);
    sum_k2a4 += rs.mult_[i] * rs.mult_[i] * n2 * n2;
  }
  rs.lipschitz_ = std::sqrt(static_cast<double>(m) * sum_k2a4);

  DisjointSets orbits(m);
  rs.crystallographic_ = true;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      orbits.unite(static_cast<int>(j), match_root(roots, reflect(roots[i], roots[j])));
      const double c = 2.0 * dot(roots[i], roots[j]) / rs.norm_sq_[i];
      if (std::abs(c - std::round(c)) > kMatchTol) rs.crystallographic_ = false;
    }
  }
  std::vector<int> label(m, -1);
  int next = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const int r = orbits.find(static_cast<int>(j));
    if (label[r] < 0) label[r] = next++;
    rs.orbit_.push_back(label[r]);
  }
  rs.witness_ = normalized_sum(roots, dim);
  return rs;
}

RootSystem RootSystem::bessel(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::invalid_parameter, "bessel: multiplicity k must be >= 0");
  return build(1, {{1.0}}, {k}, "Bessel");
}

RootSystem RootSystem::type_a(int d, double k) {
  if (d < 2) throw Error(ErrorCode::invalid_parameter, "type A: dimension d must be >= 2");
  if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::invalid_parameter, "type A: multiplicity k must be >= 0");
  std::vector<Vector> roots;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vector a(static_cast<std::size_t>(d), 0.0);
      a[i] = 1.0;
      a[j] = -1.0;
      roots.push_back(std::move(a));
    }
  std::vector<double> mult(roots.size(), k);
  return build(d, roots, std::move(mult), "A");
}

RootSystem RootSystem::type_bcd(int d, double k, int r) {
  if (d < 2) throw Error(ErrorCode::invalid_parameter, "type B/C/D: dimension d must be >= 2");
  if (r < 0 || r > 2) throw Error(ErrorCode::invalid_parameter, "type B/C/D: r must be 0 (D), 1 (B) or 2 (C)");
  if (!(k >= 0.0) || !std::isfinite(k))
    throw Error(ErrorCode::invalid_parameter, "type B/C/D: multiplicity k must be >= 0");
  std::vector<Vector> roots;
  for (int sign : {-1, 1})
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Vector a(static_cast<std::size_t>(d), 0.0);
        a[i] = 1.0;
        a[j] = sign;
        roots.push_back(std::move(a));
      }
  if (r > 0)
    for (int i = 0; i < d; ++i) {
      Vector a(static_cast<std::size_t>(d), 0.0);
      a[i] = r;
      roots.push_back(std::move(a));
    }
  std::vector<double> mult(roots.size(), k);
  static const char* names[] = {"D", "B", "C"};
  return build(d, roots, std::move(mult), names[r]);
}

RootSystem RootSystem::custom(int dim, const std::vector<Vector>& positive_roots,
                              const std::vector<double>& multiplicities, std::string name) {
  return build(dim, positive_roots, multiplicities, std::move(name));
}

RootSystem RootSystem::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::schema, "root system document must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (key != "dim" && key != "positive_roots" && key != "multiplicities" && key != "name")
      throw Error(ErrorCode::schema, "root system document: unknown key '" + key + "'");
  for (const char* key : {"dim", "positive_roots", "multiplicities"})
    if (!doc.contains(key)) throw Error(ErrorCode::schema, std::string("root system document: missing key '") + key + "'");
  try {
    const int dim = doc.at("dim").get<int>();
    const auto roots = doc.at("positive_roots").get<std::vector<Vector>>();
    const auto mult = doc.at("multiplicities").get<std::vector<double>>();
    return custom(dim, roots, mult, doc.value("name", std::string("custom")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("root system document: ") + e.what());
  }
}

nlohmann::json RootSystem::to_json() const {
  std::vector<Vector> roots;
  for (std::size_t i = 0; i < size(); ++i) roots.emplace_back(root(i).begin(), root(i).end());
  return {{"dim", dim_}, {"positive_roots", roots}, {"multiplicities", mult_}, {"name", name_}};
}

RootSystem RootSystem::with_multiplicities(std::vector<double> multiplicities) const {
  std::vector<Vector> roots;
  for (std::size_t i = 0; i < size(); ++i) roots.emplace_back(root(i).begin(), root(i).end());
  return build(dim_, roots, std::move(multiplicities), name_);
}

double RootSystem::min_nu() const {
  return *std::min_element(mult_.begin(), mult_.end()) - 0.5;
}

void RootSystem::check_dim(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw Error(ErrorCode::invalid_parameter, "point dimension " + std::to_string(x.size()) +
                                                  " does not match root system dimension " + std::to_string(dim_));
}

bool RootSystem::in_chamber(std::span<const double> x, double margin) const {
  check_dim(x);
  for (std::size_t i = 0; i < size(); ++i)
    if (!(dot(root(i), x) > margin)) return false;
  return true;
}

double RootSystem::min_pairing(std::span<const double> x) const {
  check_dim(x);
  double m = dot(root(0), x);
  for (std::size_t i = 1; i < size(); ++i) m = std::min(m, dot(root(i), x));
  return m;
}

double RootSystem::alternating_poly(std::span<const double> x) const {
  check_dim(x);
  double p = 1.0;
  for (std::size_t i = 0; i < size(); ++i) p *= dot(root(i), x);
  return p;
}

double RootSystem::harmonic_identity_residual(std::span<const double> x) const {
  check_dim(x);
  const std::size_t m = size();
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) {
    s[i] = dot(root(i), x);
    if (!(s[i] > 0.0)) throw Error(ErrorCode::domain, "harmonic identity: point is not strictly inside the chamber");
  }
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    lhs += norm_sq_[i] / (s[i] * s[i]);
    for (std::size_t j = 0; j < m; ++j) rhs += dot(root(i), root(j)) / (s[i] * s[j]);
  }
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

Vector RootSystem::fold_into_chamber(std::span<const double> x) const {
  check_dim(x);
  Vector y(x.begin(), x.end());
  // Each reflection strictly increases <witness, y> over a finite orbit, so this terminates.
  for (int iter = 0; iter < 100000; ++iter) {
    std::size_t worst = 0;
    double worst_val = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double v = dot(root(i), y) / std::sqrt(norm_sq_[i]);
      if (v < worst_val) {
        worst_val = v;
        worst = i;
      }
    }
    if (worst_val >= 0.0) return y;
    y = reflect(root(worst), y);
  }
  throw Error(ErrorCode::convergence, "fold_into_chamber: reflection loop did not terminate");
}

RootSystem build_bessel(double k) { return RootSystem::bessel(k); }
RootSystem build_type_a(int d, double k) { return RootSystem::type_a(d, k); }
RootSystem build_type_bcd(int d, double k, int r) { return RootSystem::type_bcd(d, k, r); }
RootSystem build_custom(int dim, const std::vector<Vector>& positive_roots, const std::vector<double>& multiplicities) {
  return RootSystem::custom(dim, positive_roots, multiplicities);
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid parameter";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::validation: return "validation error";
    case ErrorCode::contract_violation: return "contract violation";
    case ErrorCode::convergence: return "convergence failure";
    case ErrorCode::configuration: return "configuration error";
    case ErrorCode::schema: return "schema error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::path_failure: return "path failure";
  }
  return "unknown error";
}

}  // namespace dunkl
