#include "dunkl/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dunkl/error.hpp"
#include "dunkl/identities.hpp"
#include "dunkl/mc.hpp"
#include "dunkl/models.hpp"
#include "dunkl/rng.hpp"

namespace dunkl {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCommands[] = {"simulate", "converge", "girsanov", "moments", "invariants"};

// Line of the first occurrence of "key" in the source text, or 0.
int line_of_key(const std::string& source, const std::string& key) {
  if (source.empty() || key.empty()) return 0;
  const auto pos = source.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  Reader(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::string where = path_ + (key.empty() ? "" : "/" + key);
    if (where.empty()) where = "/";
    std::string msg = "config " + where + ": " + what;
    if (const int line = line_of_key(source_, key.empty() ? last_segment() : key); line > 0)
      msg += " (line " + std::to_string(line) + ")";
    throw Error(ErrorCode::schema, msg);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::optional<double> number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(key, "expected a number");
    return v->get<double>();
  }
  std::optional<std::int64_t> integer(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) fail(key, "expected an integer");
    if (v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      fail(key, "integer out of range");
    return v->get<std::int64_t>();
  }
  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return v->get<std::uint64_t>();
    fail(key, "expected a non-negative integer");
  }
  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }
  std::optional<Vector> vector(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) fail(key, "expected an array of numbers");
    Vector out;
    for (const auto& e : *v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::optional<std::vector<std::int64_t>> integers(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) fail(key, "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& e : *v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }
  std::optional<Reader> object(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_object()) fail(key, "expected an object");
    return Reader(*v, path_ + "/" + key, source_);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) fail(item.key(), "unknown key");
  }

  const std::string& path() const { return path_; }
  const std::string& source() const { return source_; }

 private:
  std::string last_segment() const {
    const auto pos = path_.rfind('/');
    return pos == std::string::npos ? path_ : path_.substr(pos + 1);
  }

  const json& j_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

void parse_model(Reader r, ModelConfig& m) {
  const auto preset = r.string("preset");
  const auto custom = r.string("custom");
  if (preset.has_value() == custom.has_value()) r.fail("", "exactly one of 'preset' or 'custom' is required");
  if (preset) m.preset = *preset;
  if (custom) m.custom = *custom;
  if (auto d = r.integer("d")) m.d = static_cast<int>(*d);
  if (auto k = r.number("k")) m.k = *k;
  if (auto rr = r.integer("r")) m.r = static_cast<int>(*rr);
  if (auto x0 = r.vector("x0")) m.x0 = *x0;
  if (const json* drift = r.find("drift")) {
    if (drift->is_string()) {
      m.drift = drift->get<std::string>();
      if (m.drift != "none" && m.drift != "heckman_opdam") r.fail("drift", "expected 'none', 'heckman_opdam' or {\"constant\": [...]}");
    } else if (drift->is_object()) {
      Reader dr(*drift, r.path() + "/drift", r.source());
      const auto value = dr.vector("constant");
      if (!value) dr.fail("", "expected {\"constant\": [...]}");
      dr.finish();
      m.drift = "constant";
      m.drift_value = *value;
    } else {
      r.fail("drift", "expected 'none', 'heckman_opdam' or {\"constant\": [...]}");
    }
  }
  if (custom && (m.d || m.r)) r.fail("", "'d' and 'r' apply to presets only");
  r.finish();
}

void parse_scheme(Reader r, SchemeConfig& s) {
  if (auto v = r.string("variant")) {
    if (*v == "semi_implicit") s.variant = Variant::semi_implicit;
    else if (*v == "truncated") s.variant = Variant::truncated;
    else r.fail("variant", "expected 'semi_implicit' or 'truncated'");
  }
  if (auto n = r.integer("n_steps")) s.n_steps = *n;
  if (auto t = r.number("horizon")) s.horizon = *t;
  if (auto e = r.object("eps_rule")) {
    const auto kind = e->string("kind");
    const auto value = e->number("value");
    if (!kind || !value) e->fail("", "expected {\"kind\": \"fixed\"|\"scaled\", \"value\": number}");
    if (*kind == "fixed") s.eps_rule = EpsRule::fixed(*value);
    else if (*kind == "scaled") s.eps_rule = EpsRule::scaled(*value);
    else e->fail("kind", "expected 'fixed' or 'scaled'");
    e->finish();
  }
  if (auto tol = r.number("solver_tol")) s.solver_tol = *tol;
  if (auto margin = r.number("initial_margin")) s.initial_margin = *margin;
  r.finish();
}

void parse_mc(Reader r, McConfig& mc) {
  if (auto m = r.integer("M")) mc.paths = *m;
  if (auto n = r.integers("n_values")) mc.n_values = *n;
  if (auto n = r.integer("n_ref")) mc.n_ref = *n;
  if (auto p = r.number("p")) mc.p = *p;
  if (auto seed = r.unsigned_integer("seed")) mc.seed = *seed;
  r.finish();
}

json eps_rule_json(const EpsRule& e) {
  return {{"kind", e.kind == EpsRule::Kind::fixed ? "fixed" : "scaled"}, {"value", e.value}};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::schema, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + p.string() + "'");
  return out;
}

void close_out(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw Error(ErrorCode::io, "failed writing '" + p.string() + "'");
}

struct Resolved {
  ModelSpec model;
  json model_json;
};

Resolved resolve_model(const ModelConfig& m, const fs::path& base_dir) {
  auto make_extra = [&](const RootSystem* rs) {
    if (m.drift == "constant") return BoundedDrift::constant(m.drift_value);
    if (m.drift == "heckman_opdam") {
      if (!rs) throw Error(ErrorCode::configuration, "drift 'heckman_opdam' needs a root system");
      return BoundedDrift::heckman_opdam(*rs);
    }
    return BoundedDrift::none();
  };
  json mj;
  std::optional<ModelSpec> spec;
  if (!m.custom.empty()) {
    fs::path file = m.custom;
    if (file.is_relative()) file = base_dir / file;
    if (!fs::exists(file)) throw Error(ErrorCode::schema, "config /model/custom: file '" + file.string() + "' not found");
    const std::string text = read_file(file);
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::schema, "root system file '" + file.string() + "': " + e.what());
    }
    RootSystem rs = RootSystem::from_json(doc);
    BoundedDrift extra = make_extra(&rs);
    spec = custom_model(std::move(rs), m.x0, std::move(extra), "custom");
    mj["custom"] = fs::absolute(file).lexically_normal().string();
  } else {
    PresetParams p;
    p.d = m.d;
    p.k = m.k;
    p.r = m.r;
    p.x0 = m.x0;
    if (m.drift == "heckman_opdam" && m.preset != "heckman_opdam")
      throw Error(ErrorCode::configuration, "drift 'heckman_opdam' is available through the heckman_opdam preset");
    p.extra = make_extra(nullptr);
    spec = preset(m.preset, p);
    mj["preset"] = m.preset;
    if (m.preset != "bessel") mj["d"] = spec->dim();
    mj["k"] = m.k;
    if (m.preset == "wishart") mj["r"] = m.r.value_or(1);
  }
  mj["x0"] = spec->x0;
  if (m.drift == "constant") mj["drift"] = {{"constant", m.drift_value}};
  else mj["drift"] = m.drift;
  return {std::move(*spec), std::move(mj)};
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int map_error(const Error& e, std::string& message) {
  switch (e.code()) {
    case ErrorCode::schema:
      message = std::string("schema error: ") + e.what();
      return exit_schema;
    case ErrorCode::contract_violation:
      message = std::string("numeric precondition violated, need h ∈ (0, ε²/L_k): ") + e.what();
      return exit_precondition;
    case ErrorCode::configuration:
    case ErrorCode::invalid_parameter:
    case ErrorCode::validation:
      message = std::string("numeric precondition violated: ") + e.what();
      return exit_precondition;
    default:
      message = std::string(to_string(e.code())) + ": " + e.what();
      return exit_runtime;
  }
}

}  // namespace

const char* to_string(Command c) noexcept { return kCommands[static_cast<int>(c)]; }

std::optional<Command> parse_command(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kCommands[i]) return static_cast<Command>(i);
  return std::nullopt;
}

RunConfig parse_run_config(const json& doc, const std::string& source) {
  RunConfig cfg;
  Reader root(doc, "", source);
  if (auto c = root.string("command")) {
    cfg.command = parse_command(*c);
    if (!cfg.command) root.fail("command", "unknown command '" + *c + "'");
  }
  auto model = root.object("model");
  if (!model) root.fail("model", "missing required key");
  parse_model(*model, cfg.model);
  if (auto s = root.object("scheme")) parse_scheme(*s, cfg.scheme);
  if (auto m = root.object("mc")) parse_mc(*m, cfg.mc);
  if (auto s = root.object("simulate")) {
    if (auto n = s->integer("paths")) cfg.simulate_paths = *n;
    s->finish();
  }
  if (auto g = root.object("girsanov")) {
    if (const json* nu = g->find("nu")) {
      if (nu->is_number()) {
        cfg.girsanov_nu = Vector{nu->get<double>()};
      } else {
        cfg.girsanov_nu = g->vector("nu");
      }
    }
    if (auto f = g->string("functional")) {
      if (*f != "terminal_norm" && *f != "one") g->fail("functional", "expected 'terminal_norm' or 'one'");
      cfg.girsanov_functional = *f;
    }
    g->finish();
  }
  if (auto m = root.object("moments")) {
    if (auto q = m->vector("q")) cfg.moment_q = *q;
    m->finish();
  }
  if (auto inv = root.object("invariants")) {
    if (auto n = inv->integer("points")) cfg.invariant_points = *n;
    inv->finish();
  }
  if (auto out = root.string("output")) cfg.output = *out;
  root.finish();
  return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const auto head = text.substr(0, byte > 0 ? byte - 1 : 0);
    const auto line = 1 + std::count(head.begin(), head.end(), '\n');
    const auto nl = head.rfind('\n');
    const auto col = nl == std::string::npos ? head.size() + 1 : head.size() - nl;
    throw Error(ErrorCode::schema, "invalid JSON at line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": " + e.what());
  }
  return parse_run_config(doc, text);
}

RunOutcome run(const std::string& config_path, const RunOptions& options) {
  RunOutcome outcome;
  try {
    const RunConfig cfg = parse_run_config_text(read_file(config_path));
    std::optional<Command> command = options.command ? options.command : cfg.command;
    if (!command) throw Error(ErrorCode::schema, "config /command: no command given");
    if (options.command && cfg.command && *options.command != *cfg.command)
      throw Error(ErrorCode::schema, std::string("config /command: '") + to_string(*cfg.command) +
                                         "' conflicts with the requested subcommand '" + to_string(*command) + "'");
    McConfig mc = cfg.mc;
    if (options.seed) mc.seed = *options.seed;
    const int threads = options.threads;
    const fs::path out_dir = options.output ? fs::path(*options.output) : fs::path(cfg.output);
    const fs::path base_dir = fs::absolute(fs::path(config_path)).parent_path();

    Resolved res = resolve_model(cfg.model, base_dir);
    const ModelSpec& model = res.model;
    const RootSystem& rs = model.root_system();
    cfg.scheme.validate(rs);

    Vector nu(rs.size());
    for (std::size_t a = 0; a < rs.size(); ++a) nu[a] = rs.nu(a);
    if (cfg.girsanov_nu) {
      if (cfg.girsanov_nu->size() == 1) std::fill(nu.begin(), nu.end(), cfg.girsanov_nu->front());
      else if (cfg.girsanov_nu->size() == rs.size()) nu = *cfg.girsanov_nu;
      else throw Error(ErrorCode::configuration, "girsanov.nu must be a number or have one entry per positive root");
    }

    json manifest = {
        {"command", to_string(*command)},
        {"model", res.model_json},
        {"scheme",
         {{"variant", to_string(cfg.scheme.variant)},
          {"n_steps", cfg.scheme.n_steps},
          {"horizon", cfg.scheme.horizon},
          {"eps_rule", eps_rule_json(cfg.scheme.eps_rule)},
          {"solver_tol", cfg.scheme.solver_tol},
          {"initial_margin", cfg.scheme.initial_margin}}},
        {"mc", {{"M", mc.paths}, {"n_values", mc.n_values}, {"n_ref", mc.n_ref}, {"p", mc.p}, {"seed", mc.seed}}},
        {"simulate", {{"paths", cfg.simulate_paths}}},
        {"girsanov", {{"nu", nu}, {"functional", cfg.girsanov_functional}}},
        {"moments", {{"q", cfg.moment_q}}},
        {"invariants", {{"points", cfg.invariant_points}}},
    };

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + out_dir.string() + "': " + ec.message());
    auto emit = [&](const std::string& name, auto&& writer) {
      const fs::path p = out_dir / name;
      auto out = open_out(p);
      writer(out);
      close_out(out, p);
      outcome.artifacts.push_back(p.string());
    };
    emit("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });

    bool checks_passed = true;
    switch (*command) {
      case Command::simulate: {
        if (cfg.simulate_paths < 1) throw Error(ErrorCode::configuration, "simulate.paths must be >= 1");
        PathSimulator sim(model, cfg.scheme);
        Path path;
        std::vector<double> incr(static_cast<std::size_t>(cfg.scheme.n_steps) * static_cast<std::size_t>(model.dim()));
        for (std::int64_t m = 0; m < cfg.simulate_paths; ++m) {
          BrownianLattice(mc.seed, static_cast<std::uint64_t>(m), cfg.scheme.n_steps, cfg.scheme.horizon, model.dim())
              .fine_increments(incr);
          try {
            sim.run(incr, path);
          } catch (const PathError& e) {
            throw PathError("path " + std::to_string(m) + ", " + e.what(), m, e.step());
          }
          const std::string stem = "path_" + std::to_string(m);
          emit(stem + ".csv", [&](std::ostream& os) { write_path_csv(os, path); });
          if (model.transform == Transform::square_components)
            emit(stem + "_squared.csv", [&](std::ostream& os) { write_path_csv(os, wishart_transform(path)); });
        }
        break;
      }
      case Command::converge: {
        StudyConfig study{mc.n_values, mc.n_ref, mc.paths, mc.p, mc.seed, threads};
        const ConvergenceReport report = strong_error_study(model, cfg.scheme, study);
        emit("convergence.csv", [&](std::ostream& os) { write_report_csv(os, report); });
        json summary = report_summary(report);
        summary["n_values"] = report.n_values;
        summary["errors"] = report.errors;
        summary["std_errors"] = report.std_errors;
        emit("convergence.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
        break;
      }
      case Command::girsanov: {
        if (!model.drift.extra().is_zero())
          throw Error(ErrorCode::configuration, "girsanov: the model must not carry an extra drift");
        GirsanovConfig g{rs, nu, model.x0, cfg.scheme.horizon, cfg.scheme.n_steps, mc.paths, mc.seed, threads};
        PathFunctional fn;
        if (cfg.girsanov_functional == "one") fn = [](const Path&) { return 1.0; };
        else fn = [](const Path& p) { return norm(p.state(p.size() - 1)); };
        const WeightedExpectation w = weighted_expectation(fn, g);
        const double gap = std::abs(w.direct.mean - w.weighted.mean);
        const bool agree = gap <= 3.0 * w.combined_se();
        const bool martingale = std::abs(w.weight.mean - 1.0) <= 3.0 * w.weight.std_error;
        checks_passed = agree && martingale;
        emit("girsanov.csv", [&](std::ostream& os) {
          os << "estimator,mean,std_error\n";
          os << "direct," << g17(w.direct.mean) << ',' << g17(w.direct.std_error) << '\n';
          os << "weighted," << g17(w.weighted.mean) << ',' << g17(w.weighted.std_error) << '\n';
          os << "weight," << g17(w.weight.mean) << ',' << g17(w.weight.std_error) << '\n';
        });
        json summary = {{"direct", {w.direct.mean, w.direct.std_error}},
                        {"weighted", {w.weighted.mean, w.weighted.std_error}},
                        {"weight", {w.weight.mean, w.weight.std_error}},
                        {"combined_se", w.combined_se()},
                        {"estimators_agree", agree},
                        {"weight_mean_one", martingale},
                        {"passed", checks_passed}};
        emit("girsanov.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
        if (!checks_passed) outcome.message = "girsanov checks failed";
        break;
      }
      case Command::moments: {
        const auto rows = moment_scan(model, cfg.moment_q, mc.paths, cfg.scheme.n_steps, cfg.scheme.horizon, mc.seed,
                                      threads);
        emit("moments.csv", [&](std::ostream& os) { write_moments_csv(os, rows); });
        break;
      }
      case Command::invariants: {
        InvariantOptions opt;
        opt.points = cfg.invariant_points;
        opt.seed = mc.seed;
        const auto results = invariant_suite(rs, opt);
        for (const auto& r : results) checks_passed = checks_passed && r.passed;
        json doc = {{"root_system", rs.name()}, {"passed", checks_passed}, {"properties", to_json(results)}};
        emit("invariants.json", [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
        if (!checks_passed) outcome.message = "invariant checks failed";
        break;
      }
    }
    outcome.exit_code = checks_passed ? exit_ok : exit_check_failed;
  } catch (const Error& e) {
    outcome.exit_code = map_error(e, outcome.message);
  } catch (const std::exception& e) {
    outcome.exit_code = exit_runtime;
    outcome.message = std::string("runtime error: ") + e.what();
  }
  return outcome;
}

}  // namespace dunkl
