#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "shocksim/errors.hpp"
#include "shocksim/ode_semigroup.hpp"
#include "shocksim/parallel.hpp"
#include "shocksim/plaplacian.hpp"
#include "shocksim/poisson.hpp"
#include "shocksim/process.hpp"
#include "shocksim/stats.hpp"

namespace shocksim::app {

namespace {

constexpr double kUnused = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<Kind, std::string>> kKindNames{
    {Kind::PathDump, "path-dump"}, {Kind::Bounds, "bounds"},         {Kind::Slln, "slln"},
    {Kind::Clt, "clt"},            {Kind::CkTest, "ck-test"},        {Kind::EProperty, "e-property"},
    {Kind::Moments, "moments"},    {Kind::Counterexample, "counterexample"},
};

// Kind-specific defaults.  A null horizon/replicas/burn_in means the kind
// does not use that key.
Json kind_defaults(Kind kind) {
  Json d;
  d["horizon"] = nullptr;
  d["replicas"] = nullptr;
  d["burn_in"] = nullptr;
  d["initial"] = nullptr;
  d["functional"] = Json{{"kind", "v-norm"}, {"index", 0}, {"clip", nullptr}, {"shift", 0.0}};
  d["params"] = Json::object();
  d["tolerances"] = Json::object();
  switch (kind) {
    case Kind::PathDump:
      d["horizon"] = 10.0;
      d["params"] = {{"grid_points", 200}};
      break;
    case Kind::Bounds:
      d["horizon"] = 100.0;
      d["replicas"] = 100;
      d["initial"] = 3.0;
      d["params"] = {{"grid_points", 200}, {"coupled_initial", -3.0}, {"perturbation", 0.1}};
      d["tolerances"] = {{"bound", 1e-9}};
      break;
    case Kind::Slln:
      d["horizon"] = 1e4;
      d["replicas"] = 10000;
      d["burn_in"] = "50/theta";
      d["params"] = {{"batches", 32},         {"cross_check", true},  {"forgetting", true},
                     {"forgetting_initial", 100.0}, {"stabilization", true}};
      break;
    case Kind::Clt:
      d["horizon"] = 500.0;
      d["replicas"] = 2000;
      d["burn_in"] = "50/theta";
      d["params"] = {{"prepass_horizon", 2000.0}, {"prepass_replicas", 2000}, {"doubling", true}};
      d["tolerances"] = {{"ks_max", 0.05}, {"sigma2_joint_se", 3.0}};
      break;
    case Kind::CkTest:
      d["replicas"] = 10000;
      d["initial"] = 1.0;
      d["params"] = {{"t", 1.0},
                     {"h", 1.0},
                     {"alpha", 0.01},
                     {"functionals", Json::array({Json{{"kind", "coordinate"}, {"index", 0}},
                                                  Json{{"kind", "v-norm"}}})}};
      break;
    case Kind::EProperty:
      d["replicas"] = 1000;
      d["initial"] = 0.5;
      d["functional"] = Json{{"kind", "coordinate"}, {"index", 0}, {"clip", {-1.0, 1.0}}, {"shift", 0.0}};
      d["params"] = {{"others", {0.501, -3.0, 40.0}}, {"times", {0.1, 1.0, 10.0, 100.0}}};
      d["tolerances"] = {{"lipschitz", 1e-12}, {"decay", 1e-9}};
      break;
    case Kind::Moments:
      d["replicas"] = 100000;
      d["params"] = {{"t", 10.0}};
      d["tolerances"] = {{"rel_error", 0.02}};
      break;
    case Kind::Counterexample:
      d["initial"] = 1.0;
      d["params"] = {{"rhos", {0.4, 0.6}}, {"horizons", {100.0, 1000.0, 10000.0}}};
      d["tolerances"] = {{"closed_form", 1e-9}, {"slow_min", 1.0}, {"fast_max", 0.2}};
      break;
  }
  return d;
}

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
}

double get_number(const Json& v, const std::string& name) {
  if (!v.is_number()) bad(name + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(name + " must be finite");
  return x;
}

double positive(const Json& v, const std::string& name) {
  const double x = get_number(v, name);
  if (!(x > 0.0)) bad(name + " must be positive");
  return x;
}

std::size_t count(const Json& v, const std::string& name, std::size_t min = 1) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min))
    bad(name + " must be an integer >= " + std::to_string(min));
  return v.get<std::size_t>();
}

std::vector<double> numbers(const Json& v, const std::string& name) {
  if (!v.is_array()) bad(name + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, name));
  return out;
}

// Merges user params over defaults; unknown keys are errors.
Json merge(const Json& defaults, const Json& user, const std::string& where) {
  Json out = defaults;
  if (user.is_null()) return out;
  std::set<std::string> allowed;
  for (const auto& [key, _] : defaults.items()) allowed.insert(key);
  reject_unknown(user, allowed, where);
  for (const auto& [key, value] : user.items()) out[key] = value;
  return out;
}

SemigroupSpec parse_semigroup(const Json& j) {
  SemigroupSpec s;
  if (j.is_null()) return s;
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) bad("semigroup needs a string 'id'");
  s.id = j["id"].get<std::string>();
  if (s.id == "ode") {
    reject_unknown(j, {"id", "rho"}, "semigroup");
    if (j.contains("rho")) s.rho = positive(j["rho"], "semigroup.rho");
  } else if (s.id == "plaplacian") {
    reject_unknown(j, {"id", "n", "length", "p", "q", "dt_max", "gamma", "weights"}, "semigroup");
    if (j.contains("n")) s.n = count(j["n"], "semigroup.n", 4);
    if (j.contains("length")) s.length = positive(j["length"], "semigroup.length");
    if (j.contains("p")) s.p = get_number(j["p"], "semigroup.p");
    if (j.contains("q")) s.q = get_number(j["q"], "semigroup.q");
    if (j.contains("dt_max")) s.dt_max = positive(j["dt_max"], "semigroup.dt_max");
    if (j.contains("gamma")) s.gamma = positive(j["gamma"], "semigroup.gamma");
    if (j.contains("weights") && !j["weights"].is_null()) {
      reject_unknown(j["weights"], {"breaks", "values"}, "semigroup.weights");
      s.weight_breaks = numbers(j["weights"].value("breaks", Json::array()), "semigroup.weights.breaks");
      s.weight_values = numbers(j["weights"].value("values", Json::array()), "semigroup.weights.values");
      if (s.weight_values.size() != s.weight_breaks.size() + 1)
        bad("semigroup.weights needs one more value than breaks");
    }
  } else {
    bad("unknown semigroup id '" + s.id + "' (expected ode or plaplacian)");
  }
  return s;
}

ShockLawSpec parse_shocks(const Json& j) {
  ShockLawSpec s;
  if (j.is_null()) return s;
  reject_unknown(j, {"law", "scale", "gaussian_amplitude", "dimension"}, "shocks");
  if (j.contains("law")) {
    if (!j["law"].is_string()) bad("shocks.law must be a string");
    s.kind = shock_kind_from_string(j["law"].get<std::string>());
  }
  if (j.contains("scale")) {
    s.scale = get_number(j["scale"], "shocks.scale");
    if (s.scale < 0.0) bad("shocks.scale must be nonnegative");
  }
  if (j.contains("gaussian_amplitude")) {
    if (!j["gaussian_amplitude"].is_boolean()) bad("shocks.gaussian_amplitude must be a boolean");
    s.gaussian_amplitude = j["gaussian_amplitude"].get<bool>();
  }
  if (j.contains("dimension") && !j["dimension"].is_null()) s.dimension = count(j["dimension"], "shocks.dimension");
  return s;
}

FunctionalSpec parse_functional(const Json& j, const std::string& where) {
  FunctionalSpec f;
  reject_unknown(j, {"kind", "index", "clip", "shift"}, where);
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) bad(where + ".kind must be a string");
    f.kind = j["kind"].get<std::string>();
    if (f.kind != "v-norm" && f.kind != "coordinate") bad(where + ".kind must be v-norm or coordinate");
  }
  if (j.contains("index")) f.index = count(j["index"], where + ".index", 0);
  if (j.contains("clip") && !j["clip"].is_null()) {
    const auto c = numbers(j["clip"], where + ".clip");
    if (c.size() != 2 || !(c[0] < c[1])) bad(where + ".clip must be [lo, hi] with lo < hi");
    f.clip = std::pair{c[0], c[1]};
  }
  if (j.contains("shift")) f.shift = get_number(j["shift"], where + ".shift");
  return f;
}

Json functional_json(const FunctionalSpec& f) {
  Json j{{"kind", f.kind}, {"index", f.index}};
  j["clip"] = f.clip ? Json{f.clip->first, f.clip->second} : Json(nullptr);
  j["shift"] = f.shift;
  return j;
}

Json semigroup_json(const SemigroupSpec& s) {
  if (s.id == "ode") return Json{{"id", "ode"}, {"rho", s.rho}};
  Json j{{"id", "plaplacian"}, {"n", s.n},           {"length", s.length},
         {"p", s.p},           {"q", s.q},           {"dt_max", s.dt_max},
         {"gamma", s.gamma}};
  j["weights"] = s.weight_values.empty() ? Json(nullptr)
                                         : Json{{"breaks", s.weight_breaks}, {"values", s.weight_values}};
  return j;
}

bool used(double x) { return !std::isnan(x); }

}  // namespace

std::string to_string(Kind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

Kind kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  std::string all;
  for (const auto& [k, n] : kKindNames) all += (all.empty() ? "" : ", ") + n;
  throw ConfigError("unknown experiment '" + name + "' (expected one of " + all + ")");
}

const std::vector<Kind>& all_kinds() {
  static const std::vector<Kind> kinds = [] {
    std::vector<Kind> k;
    for (const auto& [kind, _] : kKindNames) k.push_back(kind);
    return k;
  }();
  return kinds;
}

Config parse_config(const Json& doc) {
  reject_unknown(doc,
                 {"experiment", "semigroup", "shocks", "theta", "seed", "horizon", "replicas", "burn_in",
                  "quad_dt", "initial", "functional", "params", "tolerances"},
                 "config");
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) bad("config needs a string 'experiment'");
  Config c;
  c.kind = kind_from_string(doc["experiment"].get<std::string>());
  const Json d = kind_defaults(c.kind);
  c.semigroup = parse_semigroup(doc.value("semigroup", Json()));
  c.shocks = parse_shocks(doc.value("shocks", Json()));
  if (doc.contains("theta")) c.theta = positive(doc["theta"], "theta");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0))
      bad("seed must be a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }

  auto scalar_key = [&](const char* key, auto parse) -> double {
    if (d[key].is_null()) {
      if (doc.contains(key) && !doc[key].is_null())
        bad(std::string(key) + " is not used by experiment " + to_string(c.kind));
      return kUnused;
    }
    if (doc.contains(key)) return parse(doc[key]);
    return kUnused;
  };
  c.horizon = scalar_key("horizon", [](const Json& v) { return positive(v, "horizon"); });
  if (!d["horizon"].is_null() && !used(c.horizon)) c.horizon = d["horizon"].get<double>();
  const double reps = scalar_key("replicas", [](const Json& v) { return double(count(v, "replicas", 2)); });
  c.replicas = used(reps) ? static_cast<std::size_t>(reps)
               : d["replicas"].is_null() ? 0
                                         : d["replicas"].get<std::size_t>();
  c.burn_in = scalar_key("burn_in", [](const Json& v) {
    const double b = get_number(v, "burn_in");
    if (b < 0.0) bad("burn_in must be nonnegative");
    return b;
  });
  if (!d["burn_in"].is_null() && !used(c.burn_in)) c.burn_in = 50.0 / c.theta;
  if (doc.contains("quad_dt")) {
    c.quad_dt = get_number(doc["quad_dt"], "quad_dt");
    if (c.quad_dt < 0.0) bad("quad_dt must be nonnegative (0 selects the default)");
  }
  c.initial = doc.contains("initial") ? doc["initial"] : d["initial"];
  if (!c.initial.is_null() && !c.initial.is_number() && !c.initial.is_array())
    bad("initial must be null, a number or an array");
  c.functional = parse_functional(doc.contains("functional") ? doc["functional"] : d["functional"], "functional");
  c.params = merge(d["params"], doc.value("params", Json()), "params");
  c.tolerances = merge(d["tolerances"], doc.value("tolerances", Json()), "tolerances");
  for (const auto& [key, value] : c.tolerances.items()) positive(value, "tolerances." + key);
  if (c.kind == Kind::Counterexample) {
    if (c.semigroup.id != "ode") bad("counterexample needs the ode semigroup");
    if (c.shocks.kind != ShockKind::Zero) bad("counterexample needs zero shocks");
    if (!(c.initial.is_number() && c.initial.get<double>() == 1.0)) bad("counterexample is defined for initial = 1");
  }
  return c;
}

Config load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

Json to_json(const Config& c) {
  Json j;
  j["experiment"] = to_string(c.kind);
  j["semigroup"] = semigroup_json(c.semigroup);
  Json shocks{{"law", shocksim::to_string(c.shocks.kind)},
              {"scale", c.shocks.scale},
              {"gaussian_amplitude", c.shocks.gaussian_amplitude}};
  shocks["dimension"] = c.shocks.dimension ? Json(*c.shocks.dimension) : Json(nullptr);
  j["shocks"] = shocks;
  j["theta"] = c.theta;
  j["seed"] = c.seed;
  j["horizon"] = used(c.horizon) ? Json(c.horizon) : Json(nullptr);
  j["replicas"] = c.replicas > 0 ? Json(c.replicas) : Json(nullptr);
  j["burn_in"] = used(c.burn_in) ? Json(c.burn_in) : Json(nullptr);
  j["quad_dt"] = c.quad_dt;
  j["initial"] = c.initial;
  j["functional"] = functional_json(c.functional);
  j["params"] = c.params;
  j["tolerances"] = c.tolerances;
  return j;
}

SemigroupPtr build_semigroup(const SemigroupSpec& s) {
  try {
    if (s.id == "ode") return std::make_shared<const OdeSemigroup>(OdeSemigroupParams{s.rho});
    std::vector<double> w = s.weight_values.empty()
                                ? std::vector<double>(s.n, s.gamma)
                                : piecewise_cell_weights(s.n, s.length, s.weight_breaks, s.weight_values);
    return std::make_shared<const PLaplacianSemigroup>(PLapGrid(s.n, s.length, s.p, std::move(w), s.q), s.dt_max);
  } catch (const InputError& e) {
    throw ConfigError(std::string("semigroup: ") + e.what());
  }
}

Model build_model(const Config& cfg) {
  auto m = make_model(build_semigroup(cfg.semigroup), cfg.shocks, cfg.theta, cfg.seed);
  return m;
}

Functional build_functional(const FunctionalSpec& spec, const Semigroup& sg) {
  if (spec.kind == "coordinate" && spec.index >= sg.dimension())
    bad("functional index " + std::to_string(spec.index) + " out of range");
  Functional f = spec.kind == "coordinate" ? Functional::coordinate(spec.index, sg.v_norm())
                                           : Functional::v_norm(sg.v_norm());
  if (spec.shift != 0.0) f = f.shifted(spec.shift);
  if (spec.clip) f = f.clipped(spec.clip->first, spec.clip->second);
  return f;
}

StateVector build_state(const Json& spec, const Model& model) {
  const Semigroup& sg = *model.semigroup;
  if (spec.is_null()) return model.zero();
  std::vector<double> v;
  if (spec.is_number()) {
    const double a = get_number(spec, "initial state");
    const auto& profile = model.law->space().profile;
    for (double p : profile) v.push_back(sg.dimension() == 1 ? a : a * p);
  } else {
    v = numbers(spec, "initial state");
    if (v.size() != sg.dimension())
      bad("initial state has " + std::to_string(v.size()) + " coordinates, expected " +
          std::to_string(sg.dimension()));
  }
  StateVector s(std::move(v), sg.v_norm());
  if (model.law->space().mean_zero && std::abs(s.mean()) > 1e-10)
    bad("initial state must have zero mean for the p-Laplacian");
  return s;
}

bool Outcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

const Check* Outcome::worst() const {
  const Check* w = nullptr;
  for (const auto& c : checks)
    if (!w || c.margin() > w->margin()) w = &c;
  return w;
}

namespace {

double num(const Json& j, const char* key) { return positive(j.at(key), key); }

Outcome run_path_dump(const Config& cfg, const Model& model) {
  Outcome out;
  const auto x = build_state(cfg.initial, model);
  ProcessPath path = model.path(StreamFamily::Path, 0, x);
  const auto grid = verification_grid(path.stream(), cfg.horizon, count(cfg.params["grid_points"], "grid_points"));
  out.header = {"t", "residual_life", "norm"};
  for (std::size_t i = 0; i < x.size(); ++i) out.header.push_back("x" + std::to_string(i));
  for (double t : grid) {
    const auto s = path.state_at(t);
    std::vector<double> row{t, path.stream().residual_life(t), norm(s)};
    for (double v : s.coords()) row.push_back(v);
    out.rows.push_back(std::move(row));
  }
  out.results["points"] = grid.size();
  out.results["jumps"] = path.stream().count_at(cfg.horizon);
  out.results["stream_id"] = path.stream().stream_id();
  return out;
}

Outcome run_bounds(const Config& cfg, const Model& model) {
  Outcome out;
  const auto x = build_state(cfg.initial, model);
  const auto y = build_state(cfg.params["coupled_initial"], model);
  const double eps = get_number(cfg.params["perturbation"], "perturbation");
  const std::size_t points = count(cfg.params["grid_points"], "grid_points");
  const bool has_norm = model.semigroup->certificate() && model.semigroup->fixes_zero();
  struct Row {
    std::uint64_t id;
    std::size_t points, jumps;
    double norm, coupling, continuity, perturbed;
  };
  std::vector<Row> rows(cfg.replicas);
  parallel_for(cfg.replicas, [&](std::size_t r) {
    auto stream = model.stream(StreamFamily::Bounds, r);
    ProcessPath a(model.semigroup, stream, x), b(model.semigroup, stream, y);
    ProcessPath c(model.semigroup, stream, y,
                  [eps](std::size_t, const StateVector& eta) { return (1.0 + eps) * eta; });
    const auto grid = verification_grid(*stream, cfg.horizon, points);
    Row row{stream->stream_id(), grid.size(), stream->count_at(cfg.horizon), kUnused, kUnused, 0, 0};
    if (has_norm) {
      row.norm = verify_norm_bound(a, grid).worst_margin;
      row.coupling = verify_coupling_bound(a, b, grid).worst_margin;
    }
    row.continuity = verify_continuity_bound(a, b, grid).worst_margin;
    row.perturbed = verify_continuity_bound(a, c, grid).worst_margin;
    rows[r] = row;
  });
  out.header = {"path", "stream_id", "grid_points", "jumps", "norm_margin", "coupling_margin",
                "continuity_margin", "perturbed_continuity_margin"};
  double wn = -1e300, wc = -1e300, wl = -1e300, wp = -1e300;
  std::size_t total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& w = rows[r];
    out.rows.push_back({double(r), double(w.id), double(w.points), double(w.jumps), w.norm, w.coupling,
                        w.continuity, w.perturbed});
    if (has_norm) {
      wn = std::max(wn, w.norm);
      wc = std::max(wc, w.coupling);
    }
    wl = std::max(wl, w.continuity);
    wp = std::max(wp, w.perturbed);
    total += w.points;
  }
  const double tol = num(cfg.tolerances, "bound");
  out.results["paths"] = cfg.replicas;
  out.results["grid_points_total"] = total;
  out.results["worst_continuity_margin"] = wl;
  out.results["worst_perturbed_continuity_margin"] = wp;
  out.checks.push_back({"continuity_bound", wl, tol, true});
  out.checks.push_back({"perturbed_continuity_bound", wp, tol, true});
  if (has_norm) {
    out.results["worst_norm_margin"] = wn;
    out.results["worst_coupling_margin"] = wc;
    out.checks.push_back({"norm_bound", wn, tol, true});
    out.checks.push_back({"coupling_bound", wc, tol, true});
  } else {
    out.notes.push_back("semigroup has no decay certificate; norm and coupling bounds skipped");
  }
  return out;
}

Outcome run_slln(const Config& cfg, const Model& model) {
  Outcome out;
  const auto psi = build_functional(cfg.functional, *model.semigroup);
  const auto x = build_state(cfg.initial, model);
  const std::size_t batches = count(cfg.params["batches"], "batches", 2);
  const double quad_dt = cfg.quad_dt > 0.0 ? cfg.quad_dt : default_quad_dt(model);
  out.results["quad_dt"] = quad_dt;
  out.header = {"check", "batch", "average"};
  if (cfg.params["cross_check"].get<bool>()) {
    StationaryMeanOptions o{cfg.burn_in, cfg.horizon, cfg.replicas, batches, quad_dt, false};
    const auto s = stationary_mean(model, psi, o);
    out.results["cross_check"] = {{"time_average", s.time_average},
                                  {"time_average_se", s.time_average_se},
                                  {"ensemble_mean", s.ensemble_mean},
                                  {"ensemble_se", s.ensemble_se},
                                  {"joint_half_width", s.joint_half_width}};
    out.checks.push_back(
        {"time_vs_ensemble", std::abs(s.time_average - s.ensemble_mean), s.joint_half_width, true});
  }
  if (cfg.params["forgetting"].get<bool>()) {
    const auto y = build_state(cfg.params["forgetting_initial"], model);
    const auto f = initial_forgetting(model, psi, x, y, cfg.horizon, quad_dt, batches);
    out.results["forgetting"] = {{"average_x", f.average_x},         {"average_y", f.average_y},
                                 {"difference", f.difference},       {"bound", f.bound},
                                 {"quadrature_error", f.quadrature_error}, {"ci_half_width", f.ci_half_width}};
    out.checks.push_back(
        {"initial_forgetting", f.difference, f.bound + f.quadrature_error + f.ci_half_width, true});
  }
  if (cfg.params["stabilization"].get<bool>()) {
    const auto s = slln_stabilization(model, psi, x, cfg.horizon, batches, quad_dt);
    out.results["stabilization"] = {{"average_t", s.average_t},
                                    {"average_2t", s.average_2t},
                                    {"ci_half_width", s.ci_half_width}};
    out.checks.push_back({"stabilization", std::abs(s.average_2t - s.average_t), s.ci_half_width, true});
    for (std::size_t b = 0; b < s.batch_averages.size(); ++b)
      out.rows.push_back({2.0, double(b), s.batch_averages[b]});
  }
  return out;
}

Json clt_json(const ErgodicReport& r) {
  auto nan_safe = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
  return Json{{"horizon", r.horizon},
              {"time_average", r.time_average},
              {"sample_mean", r.sample_mean},
              {"sigma2_hat", r.sigma2_hat},
              {"sigma2_se", r.sigma2_se},
              {"ks_distance", nan_safe(r.ks_distance)},
              {"ks_p_value", nan_safe(r.ks_p_value)},
              {"centring_shift", r.centring_shift},
              {"degenerate", r.degenerate}};
}

Outcome run_clt(const Config& cfg, const Model& model) {
  Outcome out;
  const auto psi = build_functional(cfg.functional, *model.semigroup);
  const auto x = build_state(cfg.initial, model);
  const double quad_dt = cfg.quad_dt > 0.0 ? cfg.quad_dt : default_quad_dt(model);
  const auto cert = model.semigroup->certificate();
  if (cert && cert->rho <= 0.5)
    out.notes.push_back("warning: rho <= 1/2, the central limit theorem is not expected to hold");
  const auto pre = replica_mean(model, psi, cfg.burn_in, num(cfg.params, "prepass_horizon"),
                                count(cfg.params["prepass_replicas"], "prepass_replicas", 2), quad_dt, x);
  out.results["psi_bar"] = pre.mean;
  out.results["psi_bar_se"] = pre.standard_error;
  out.results["quad_dt"] = quad_dt;

  CltOptions o;
  o.horizon = cfg.horizon;
  o.replicas = cfg.replicas;
  o.burn_in = cfg.burn_in;
  o.quad_dt = quad_dt;
  o.psi_bar = pre.mean;
  o.psi_bar_se = pre.standard_error;
  o.initial = x;
  const auto rep = clt_experiment(model, psi, o);
  out.results["clt"] = clt_json(rep);
  if (!rep.degenerate) {
    out.checks.push_back({"ks_normality", rep.ks_distance, num(cfg.tolerances, "ks_max"), true});
  } else {
    out.notes.push_back("sigma2_hat is zero: degenerate limit, normality check skipped");
  }
  if (cfg.params["doubling"].get<bool>()) {
    CltOptions o2 = o;
    o2.horizon = 2.0 * cfg.horizon;
    o2.stream_offset = cfg.replicas;
    const auto rep2 = clt_experiment(model, psi, o2);
    out.results["clt_doubled"] = clt_json(rep2);
    const double joint = std::hypot(rep.sigma2_se, rep2.sigma2_se);
    out.results["sigma2_joint_se"] = joint;
    out.checks.push_back({"sigma2_doubling", std::abs(rep2.sigma2_hat - rep.sigma2_hat),
                          num(cfg.tolerances, "sigma2_joint_se") * joint, true});
  }
  out.header = {"replica", "stream_id", "S_r", "time_average"};
  for (std::size_t r = 0; r < rep.clt_samples.size(); ++r)
    out.rows.push_back({double(r), double(rep.stream_ids[r]), rep.clt_samples[r], rep.replica_time_averages[r]});
  return out;
}

Outcome run_ck(const Config& cfg, const Model& model) {
  Outcome out;
  const auto v = build_state(cfg.initial, model);
  std::vector<Functional> psis;
  if (!cfg.params["functionals"].is_array() || cfg.params["functionals"].empty())
    bad("params.functionals must be a nonempty array");
  for (const auto& f : cfg.params["functionals"])
    psis.push_back(build_functional(parse_functional(f, "params.functionals[]"), *model.semigroup));
  const double t = num(cfg.params, "t");
  const double h = get_number(cfg.params["h"], "h");
  if (h < 0.0) bad("h must be nonnegative");
  const double alpha = num(cfg.params, "alpha");
  if (alpha >= 1.0) bad("alpha must be below 1");
  const auto r = chapman_kolmogorov_test(model, v, t, h, psis, cfg.replicas, alpha);
  out.results["max_ks"] = r.max_ks;
  out.results["critical_value"] = r.critical_value;
  out.checks.push_back({"two_sample_ks", r.max_ks, r.critical_value, true});
  out.header = {"sample", "direct", "two_stage"};
  for (std::size_t i = 0; i < r.direct.size(); ++i) out.rows.push_back({double(i), r.direct[i], r.two_stage[i]});
  return out;
}

Outcome run_e_property(const Config& cfg, const Model& model) {
  Outcome out;
  const auto psi = build_functional(cfg.functional, *model.semigroup);
  if (!psi.bounded()) bad("e-property needs a bounded functional (set functional.clip)");
  const auto v = build_state(cfg.initial, model);
  std::vector<StateVector> others;
  if (!cfg.params["others"].is_array()) bad("params.others must be an array");
  for (const auto& o : cfg.params["others"]) others.push_back(build_state(o, model));
  const auto times = numbers(cfg.params["times"], "params.times");
  for (double t : times)
    if (!(t > 0.0)) bad("params.times must be positive");
  const auto r = e_property_test(model, psi, v, others, times, cfg.replicas);
  out.results["worst_lipschitz_margin"] = r.worst_lipschitz_margin;
  out.results["worst_expectation_gap"] = r.worst_expectation_gap;
  out.results["comparisons"] = r.comparisons;
  out.checks.push_back({"pathwise_lipschitz", r.worst_lipschitz_margin, num(cfg.tolerances, "lipschitz"), true});
  out.checks.push_back({"expectation_lipschitz", r.worst_expectation_gap, 1.0 + num(cfg.tolerances, "lipschitz"), true});
  if (model.semigroup->certificate()) {
    out.results["worst_decay_margin"] = r.worst_decay_margin;
    out.checks.push_back({"pathwise_decay", r.worst_decay_margin, num(cfg.tolerances, "decay"), true});
  }
  out.header = {"metric", "value"};
  out.rows = {{0.0, r.worst_lipschitz_margin}, {1.0, r.worst_decay_margin}, {2.0, r.worst_expectation_gap}};
  return out;
}

Outcome run_moments(const Config& cfg, const Model& model) {
  Outcome out;
  const auto r = compound_moment_check(model, num(cfg.params, "t"), cfg.replicas);
  out.results = {{"mc_mean", r.mc_mean},
                 {"mc_variance", r.mc_variance},
                 {"theory_mean", r.theory_mean},
                 {"theory_variance", r.theory_variance},
                 {"closed_form_moments", r.closed_form}};
  const double tol = num(cfg.tolerances, "rel_error");
  out.checks.push_back({"mean_rel_error", r.rel_error_mean, tol, true});
  out.checks.push_back({"variance_rel_error", r.rel_error_variance, tol, true});
  out.header = {"quantity", "monte_carlo", "theory"};
  out.rows = {{0.0, r.mc_mean, r.theory_mean}, {1.0, r.mc_variance, r.theory_variance}};
  return out;
}

Outcome run_counterexample(const Config& cfg) {
  Outcome out;
  const auto rhos = numbers(cfg.params["rhos"], "params.rhos");
  auto horizons = numbers(cfg.params["horizons"], "params.horizons");
  if (rhos.empty() || horizons.empty()) bad("counterexample needs rhos and horizons");
  std::sort(horizons.begin(), horizons.end());
  const double tol = num(cfg.tolerances, "closed_form");
  out.header = {"rho", "T", "statistic", "closed_form", "abs_error"};
  Json rows = Json::array();
  double worst_err = 0.0;
  for (double rho : rhos) {
    if (!(rho > 0.0)) bad("rhos must be positive");
    SemigroupSpec spec = cfg.semigroup;
    spec.rho = rho;
    const Model m = make_model(build_semigroup(spec), cfg.shocks, cfg.theta, cfg.seed);
    ProcessPath path = m.path(StreamFamily::Path, 0, StateVector::scalar(1.0));
    const auto psi = Functional::coordinate(0, NormTag::abs());
    double last = 0.0, integral = 0.0, reached = 0.0;
    for (double T : horizons) {
      integral += integrate_accurate(path, psi, reached, T);
      reached = T;
      // psi(0) = 0 is the stationary mean of the unshocked flow.
      const double s = integral / std::sqrt(T);
      const double closed = counterexample_statistic(rho, T);
      const double err = std::abs(s - closed);
      worst_err = std::max(worst_err, err);
      out.rows.push_back({rho, T, s, closed, err});
      rows.push_back({{"rho", rho}, {"T", T}, {"statistic", s}, {"closed_form", closed}});
      last = s;
    }
    char tag[64];
    std::snprintf(tag, sizeof tag, "rho=%g T=%g", rho, horizons.back());
    if (rho <= 0.5)
      out.checks.push_back({std::string("slow_decay_statistic ") + tag, last, num(cfg.tolerances, "slow_min"), false});
    else
      out.checks.push_back({std::string("fast_decay_statistic ") + tag, last, num(cfg.tolerances, "fast_max"), true});
  }
  out.checks.insert(out.checks.begin(), Check{"closed_form_match", worst_err, tol, true});
  out.results["statistics"] = rows;
  return out;
}

}  // namespace

Outcome run(const Config& cfg) {
  if (cfg.kind == Kind::Counterexample) return run_counterexample(cfg);
  const Model model = build_model(cfg);
  switch (cfg.kind) {
    case Kind::PathDump: return run_path_dump(cfg, model);
    case Kind::Bounds: return run_bounds(cfg, model);
    case Kind::Slln: return run_slln(cfg, model);
    case Kind::Clt: return run_clt(cfg, model);
    case Kind::CkTest: return run_ck(cfg, model);
    case Kind::EProperty: return run_e_property(cfg, model);
    case Kind::Moments: return run_moments(cfg, model);
    case Kind::Counterexample: break;
  }
  return {};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_outputs(const Config& cfg, const Outcome& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json summary;
  summary["config"] = to_json(cfg);
  summary["results"] = out.results;
  Json checks = Json::array();
  for (const auto& c : out.checks)
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"limit", c.limit},
                      {"relation", c.upper ? "<=" : ">="},
                      {"margin", c.margin()},
                      {"passed", c.passed()}});
  summary["checks"] = checks;
  summary["notes"] = out.notes;
  summary["passed"] = out.passed();
  const Check* w = out.worst();
  summary["worst_check"] = w ? Json(w->name) : Json(nullptr);
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

  std::ofstream csv(dir / "data.csv");
  for (std::size_t i = 0; i < out.header.size(); ++i) csv << (i ? "," : "") << out.header[i];
  csv << '\n';
  for (const auto& row : out.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << format_double(row[i]);
    csv << '\n';
  }

  std::ofstream log(dir / "log.txt");
  log << "experiment " << to_string(cfg.kind) << " seed " << cfg.seed << '\n';
  for (const auto& n : out.notes) log << "note: " << n << '\n';
  for (const auto& c : out.checks)
    log << (c.passed() ? "PASS " : "FAIL ") << c.name << ": " << format_double(c.value)
        << (c.upper ? " <= " : " >= ") << format_double(c.limit) << " (margin " << format_double(c.margin())
        << ")\n";
  log << (out.passed() ? "result PASS" : "result FAIL");
  if (w && !out.passed()) log << " (worst: " << w->name << ", margin " << format_double(w->margin()) << ")";
  log << '\n';
}

std::string list_experiments() {
  std::ostringstream s;
  s << "experiments:\n";
  for (Kind k : all_kinds()) {
    Json d = kind_defaults(k);
    s << "  " << to_string(k) << "  defaults " << d.dump() << '\n';
  }
  s << "semigroups:\n"
    << "  ode         {\"id\": \"ode\", \"rho\": 1}\n"
    << "  plaplacian  {\"id\": \"plaplacian\", \"n\": 32, \"length\": 1, \"p\": 3, \"q\": 2, \"dt_max\": 0.001, "
       "\"gamma\": 1, \"weights\": null}\n";
  s << "shock laws:\n  zero, gaussian (gaussian-iid-coords), uniform-box, scaled-bump, two-point\n";
  s << "common keys: theta (1), seed (1), quad_dt (0 = auto), functional {\"kind\": \"v-norm\"}\n";
  return s.str();
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Simulate contractive semigroups driven by Poisson shocks"};
  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> replicas_override;
  bool quiet = false, list = false;
  cli.add_option("--config", config_path, "Experiment config (JSON)");
  cli.add_option("--out", out_dir, "Output directory")->capture_default_str();
  cli.add_option("--seed-override", seed_override, "Replace the config seed");
  cli.add_option("--replicas-override", replicas_override, "Replace the replica / sample count");
  cli.add_flag("--quiet", quiet, "Only report failures");
  cli.add_flag("--list", list, "List experiments, semigroups and shock laws");
  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << cli.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (list) {
    out << list_experiments();
    return 0;
  }
  if (config_path.empty()) {
    err << "error: --config is required\n";
    return 2;
  }
  Config cfg;
  try {
    cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (replicas_override) {
      if (cfg.replicas == 0) throw ConfigError("experiment " + to_string(cfg.kind) + " has no replica count");
      if (*replicas_override < 2) throw ConfigError("--replicas-override must be at least 2");
      cfg.replicas = *replicas_override;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  Outcome result;
  try {
    result = run(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return 1;
  }
  write_outputs(cfg, result, out_dir);
  if (!quiet) {
    for (const auto& n : result.notes) out << "note: " << n << '\n';
    for (const auto& c : result.checks)
      out << (c.passed() ? "PASS " : "FAIL ") << c.name << " margin " << format_double(c.margin()) << '\n';
    out << "wrote " << (std::filesystem::path(out_dir) / "summary.json").string() << '\n';
  }
  if (!result.passed()) {
    const Check* w = result.worst();
    err << "check failed: " << w->name << " (margin " << format_double(w->margin()) << ")\n";
    return 1;
  }
  return 0;
}

}  // namespace shocksim::app
