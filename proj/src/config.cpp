#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "kuramoto/error.hpp"
#include "kuramoto/experiment.hpp"
#include "kuramoto/observables.hpp"

namespace kuramoto {

using nlohmann::json;

const char* to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::Single: return "single";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::StabilityPair: return "stability_pair";
    case ExperimentKind::MeanfieldConvergence: return "meanfield_convergence";
    case ExperimentKind::KineticSync: return "kinetic_sync";
  }
  return "?";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Finds the first line mentioning a key, for diagnostics only.
struct Locator {
  std::string text;

  std::string hint(const std::string& key) const {
    if (text.empty() || key.empty()) return "";
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return "";
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    return " (line " + std::to_string(line) + ")";
  }
};

[[noreturn]] void fail(const std::string& path, const std::string& msg, const std::string& hint = "") {
  throw Error(Errc::ConfigError, path + ": " + msg + hint);
}

// Reads one JSON object, mirroring every value it consumes (defaults included) into `out`.
class Reader {
 public:
  Reader(const json& src, json& out, std::string path, const Locator& loc)
      : src_(src), out_(out), path_(std::move(path)), loc_(loc) {
    if (!src_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object", loc_.hint(last()));
    out_ = json::object();
  }

  bool has(const std::string& key) const { return src_.contains(key); }
  const json& raw(const std::string& key) {
    used_.insert(key);
    return src_.at(key);
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string hint(const std::string& key) const { return loc_.hint(key); }
  [[noreturn]] void error(const std::string& key, const std::string& msg) const { fail(at(key), msg, hint(key)); }
  json& out() { return out_; }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key)) {
      if (!def) error(key, "required field is missing");
      out_[key] = *def;
      return *def;
    }
    const json& v = raw(key);
    if (!v.is_number()) error(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) error(key, "expected a finite number");
    out_[key] = x;
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::uint64_t uint(const std::string& key, std::optional<std::uint64_t> def = std::nullopt) {
    if (!has(key)) {
      if (!def) error(key, "required field is missing");
      out_[key] = *def;
      return *def;
    }
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      error(key, "expected a nonnegative integer");
    }
    const auto x = v.get<std::uint64_t>();
    out_[key] = x;
    return x;
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) {
      out_[key] = def;
      return def;
    }
    const json& v = raw(key);
    if (!v.is_boolean()) error(key, "expected true or false");
    out_[key] = v.get<bool>();
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!has(key)) {
      if (!def) error(key, "required field is missing");
      out_[key] = *def;
      return *def;
    }
    const json& v = raw(key);
    if (!v.is_string()) error(key, "expected a string");
    out_[key] = v.get<std::string>();
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) error(key, "expected an array of numbers");
    std::vector<double> xs;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) error(key, "expected an array of finite numbers");
      xs.push_back(e.get<double>());
    }
    out_[key] = xs;
    return xs;
  }

  std::vector<std::uint64_t> uints(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) error(key, "expected an array of nonnegative integers");
    std::vector<std::uint64_t> xs;
    for (const auto& e : v) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0)) {
        error(key, "expected an array of nonnegative integers");
      }
      xs.push_back(e.get<std::uint64_t>());
    }
    out_[key] = xs;
    return xs;
  }

  Reader child(const std::string& key) {
    const json& v = raw(key);
    return Reader(v, out_[key], at(key), loc_);
  }

  /// Child object, or an empty one when absent (so defaults still get recorded).
  Reader child_or_empty(const std::string& key) {
    if (has(key)) return child(key);
    return Reader(empty_, out_[key], at(key), loc_);
  }

  void finish() const {
    for (const auto& [k, v] : src_.items()) {
      if (!used_.count(k)) fail(at(k), "unknown key", hint(k));
    }
  }

 private:
  std::string last() const {
    const auto dot = path_.rfind('.');
    return dot == std::string::npos ? path_ : path_.substr(dot + 1);
  }

  const json& src_;
  json& out_;
  std::string path_;
  const Locator& loc_;
  std::set<std::string> used_;
  inline static const json empty_ = json::object();
};

// Lazily seeded generator for model draws; using it without a seed is an error.
struct ModelRng {
  std::optional<std::uint64_t> seed;
  std::optional<std::mt19937_64> rng;
  std::string seed_path;

  std::mt19937_64& get(const std::string& who) {
    if (!seed) fail(who, "random draws need " + seed_path);
    if (!rng) rng.emplace(*seed);
    return *rng;
  }
};

std::vector<double> per_oscillator(Reader& r, const std::string& key, std::size_t n, double def, ModelRng& rng) {
  if (!r.has(key)) {
    r.out()[key] = def;
    return std::vector<double>(n, def);
  }
  const json& v = r.raw(key);
  if (v.is_number()) {
    r.out()[key] = v.get<double>();
    return std::vector<double>(n, v.get<double>());
  }
  if (v.is_array()) {
    std::vector<double> xs;
    for (const auto& e : v) {
      if (!e.is_number()) r.error(key, "array entries must be numbers");
      xs.push_back(e.get<double>());
    }
    if (xs.size() != n) r.error(key, "expected " + std::to_string(n) + " entries, got " + std::to_string(xs.size()));
    r.out()[key] = xs;
    return xs;
  }
  if (v.is_object() && v.size() == 1 && v.contains("uniform")) {
    const json& u = v.at("uniform");
    if (!u.is_array() || u.size() != 2 || !u[0].is_number() || !u[1].is_number()) {
      r.error(key, "uniform draw needs [lo, hi]");
    }
    const double lo = u[0].get<double>();
    const double hi = u[1].get<double>();
    if (!(lo <= hi)) r.error(key, "uniform draw needs lo <= hi");
    std::uniform_real_distribution<double> d(lo, hi);
    auto& g = rng.get(r.at(key));
    std::vector<double> xs(n);
    for (double& x : xs) x = d(g);
    r.out()[key] = v;
    return xs;
  }
  r.error(key, "expected a number, an array or {\"uniform\": [lo, hi]}");
}

CapacityMatrix parse_capacity(Reader& r, std::size_t n, ModelRng& rng) {
  const std::string key = "capacity";
  if (!r.has(key)) {
    r.out()[key] = "all_to_all";
    return CapacityMatrix::all_to_all(n);
  }
  const json& v = r.raw(key);
  try {
    if (v.is_string()) {
      if (v.get<std::string>() != "all_to_all") r.error(key, "the only named capacity is \"all_to_all\"");
      r.out()[key] = v;
      return CapacityMatrix::all_to_all(n);
    }
    if (v.is_array()) {
      if (v.size() != n) r.error(key, "expected " + std::to_string(n) + " rows");
      std::vector<double> a;
      for (const auto& row : v) {
        if (!row.is_array() || row.size() != n) r.error(key, "every row needs " + std::to_string(n) + " entries");
        for (const auto& e : row) {
          if (!e.is_number()) r.error(key, "entries must be numbers");
          a.push_back(e.get<double>());
        }
      }
      r.out()[key] = v;
      return CapacityMatrix(n, std::move(a));
    }
    if (v.is_object() && v.size() == 1 && v.contains("perturbed_uniform")) {
      json dummy;
      Locator none;
      Reader p(v.at("perturbed_uniform"), dummy, r.at(key) + ".perturbed_uniform", none);
      const double a_bar = p.number("a_bar");
      const double delta_row = p.number("delta_row");
      p.finish();
      if (!(a_bar > 0.0)) r.error(key, "a_bar must be positive");
      if (!(delta_row >= 0.0)) r.error(key, "delta_row must be nonnegative");
      // off-diagonal perturbations in [-delta_row/N, delta_row/N], so each row deviates by < delta_row
      const double half = delta_row / static_cast<double>(n);
      if (half > a_bar) r.error(key, "delta_row / N exceeds a_bar, entries could turn negative");
      std::uniform_real_distribution<double> d(-half, half);
      auto& g = rng.get(r.at(key));
      std::vector<double> a(n * n, a_bar);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = a[j * n + i] = a_bar + (half > 0.0 ? d(g) : 0.0);
      }
      r.out()[key] = v;
      return CapacityMatrix(n, std::move(a));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    r.error(key, e.what());
  }
  r.error(key, "expected \"all_to_all\", a matrix or {\"perturbed_uniform\": {...}}");
}

InitialDistribution parse_distribution(Reader r) {
  const std::string kind = r.string("kind");
  InitialDistribution d;
  if (kind == "arc_uniform") {
    d = ArcUniform{r.number("center", 0.0), r.number("halfwidth", 0.5), r.number("omega_value", 0.0),
                   r.number("omega_halfwidth", 0.0)};
  } else if (kind == "von_mises_gaussian") {
    d = VonMisesGaussian{r.number("mu", 0.0), r.number("concentration", 1.0), r.number("omega_sigma", 0.1),
                         r.number("omega_cutoff", 0.5)};
  } else if (kind == "two_pole") {
    d = TwoPole{r.number("c1", 1.0), r.number("phi_star", 0.0)};
  } else if (kind == "splay") {
    d = Splay{r.number("offset", 0.0), r.number("span", 2.0 * 3.141592653589793)};
  } else {
    r.error("kind", "unknown distribution '" + kind + "' (arc_uniform, von_mises_gaussian, two_pole, splay)");
  }
  r.finish();
  try {
    validate(d);
  } catch (const Error& e) {
    r.error("kind", e.what());
  }
  return d;
}

bool is_random(const InitialDistribution& d) {
  if (const auto* a = std::get_if<ArcUniform>(&d)) return a->halfwidth > 0.0 || a->omega_halfwidth > 0.0;
  return std::holds_alternative<VonMisesGaussian>(d);
}

struct InitResult {
  OscillatorEnsemble state;
  std::optional<InitialDistribution> dist;
  std::uint64_t seed = 0;
};

InitResult parse_init(Reader r, std::optional<std::size_t> n) {
  InitResult res;
  if (r.has("theta") || r.has("omega")) {
    res.state.theta = r.numbers("theta");
    res.state.omega = r.numbers("omega");
    r.finish();
    if (res.state.theta.size() != res.state.omega.size()) r.error("omega", "theta and omega differ in length");
    if (n && res.state.theta.size() != *n) r.error("theta", "expected " + std::to_string(*n) + " phases");
    if (res.state.theta.empty()) r.error("theta", "at least one oscillator is required");
    return res;
  }
  if (!n) r.error("distribution", "explicit theta/omega needed when model.n is not given");
  if (r.has("distribution")) {
    res.dist = parse_distribution(r.child("distribution"));
  } else {
    res.dist = Splay{0.0, 1.0};
    r.out()["distribution"] = {{"kind", "splay"}, {"offset", 0.0}, {"span", 1.0}};
  }
  if (is_random(*res.dist) && !r.has("seed")) r.error("seed", "a seed is required for a random initial distribution");
  res.seed = r.uint("seed", 0);
  const std::string center = r.string("center", "none");
  if (center != "none" && center != "omega" && center != "both") {
    r.error("center", "expected \"none\", \"omega\" or \"both\"");
  }
  r.finish();
  res.state = sample_initial(*res.dist, *n, res.seed);
  const double wm = mean(res.state.omega);
  const double tm = mean(res.state.theta);
  if (center == "omega" || center == "both") {
    for (double& w : res.state.omega) w -= wm;
  }
  if (center == "both") {
    for (double& t : res.state.theta) t -= tm;
  }
  return res;
}

TheoremId theorem_from(const std::string& s, const Reader& r) {
  for (TheoremId id : {TheoremId::T31, TheoremId::T32, TheoremId::T33, TheoremId::T34, TheoremId::T35}) {
    if (s == to_string(id)) return id;
  }
  r.error("verdicts", "unknown theorem '" + s + "' (T31..T35)");
}

const std::vector<std::string> kMonitors = {"frequency_bound", "kinetic_bound", "potential_bound", "support_bound",
                                            "order_floor"};

void set_path(json& doc, std::initializer_list<const char*> path, const json& value) {
  json* node = &doc;
  for (const char* key : path) {
    if (!node->is_object()) *node = json::object();
    node = &(*node)[key];
  }
  *node = value;
}

}  // namespace

ExperimentConfig resolve_config(json doc, const Overrides& ov) {
  return parse_config(doc.dump(), ov);
}

ExperimentConfig parse_config(const std::string& text, const Overrides& ov) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto upto = text.substr(0, byte > 0 ? byte - 1 : 0);
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    const auto nl = upto.rfind('\n');
    const auto col = nl == std::string::npos ? upto.size() + 1 : upto.size() - nl;
    throw Error(Errc::ConfigError, "JSON syntax error at line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::ConfigError, "<root>: expected an object");

  if (ov.dt) set_path(doc, {"integrator", "dt"}, *ov.dt);
  if (ov.t_final) set_path(doc, {"integrator", "t_final"}, *ov.t_final);
  if (ov.out_dir) set_path(doc, {"output", "dir"}, *ov.out_dir);
  if (ov.seed) {
    if (doc.contains("model") && doc["model"].is_object()) doc["model"]["seed"] = *ov.seed;
    const bool explicit_init = doc.contains("init") && doc["init"].is_object() &&
                               (doc["init"].contains("theta") || doc["init"].contains("omega"));
    if (!explicit_init) set_path(doc, {"init", "seed"}, *ov.seed);
  }

  const Locator loc{text};
  ExperimentConfig cfg;
  cfg.source = doc;
  json resolved;
  Reader root(doc, resolved, "", loc);

  // experiment first: its kind decides which other fields are needed
  Reader ex = root.child_or_empty("experiment");
  const std::string kind = ex.string("kind", "single");
  std::optional<std::size_t> implied_n;
  if (kind == "single") {
    cfg.kind = ExperimentKind::Single;
  } else if (kind == "sweep") {
    cfg.kind = ExperimentKind::Sweep;
    cfg.sweep.parameter = ex.string("parameter");
    static const std::set<std::string> allowed{"kappa", "mass", "friction", "natural_freq", "t_final", "dt", "seed"};
    if (!allowed.count(cfg.sweep.parameter)) {
      ex.error("parameter", "cannot sweep '" + cfg.sweep.parameter +
                                "' (kappa, mass, friction, natural_freq, t_final, dt, seed)");
    }
    cfg.sweep.values = ex.numbers("values");
  } else if (kind == "stability_pair") {
    cfg.kind = ExperimentKind::StabilityPair;
  } else if (kind == "meanfield_convergence") {
    cfg.kind = ExperimentKind::MeanfieldConvergence;
    auto& c = cfg.convergence;
    for (double x : ex.numbers("n_list")) {
      if (!(x >= 1.0) || x != std::floor(x)) ex.error("n_list", "entries must be positive integers");
      c.n_list.push_back(static_cast<std::size_t>(x));
    }
    if (c.n_list.empty()) ex.error("n_list", "must not be empty");
    c.n_ref = ex.uint("n_ref");
    for (std::size_t n : c.n_list) {
      if (n > c.n_ref) ex.error("n_list", "entries must not exceed n_ref");
    }
    c.seeds = ex.uints("seeds");
    if (c.seeds.empty()) ex.error("seeds", "at least one seed is required");
    c.sample_interval = ex.number("sample_interval", 1.0);
    c.w2.exact_cap = ex.uint("exact_cap", 512);
    c.w2.projections = ex.uint("projections", 256);
    c.w2.seed = ex.uint("projection_seed", 0x5eed);
    if (c.w2.projections == 0) ex.error("projections", "must be >= 1");
    if (!(c.sample_interval > 0.0)) ex.error("sample_interval", "must be positive");
    implied_n = c.n_ref;
  } else if (kind == "kinetic_sync") {
    cfg.kind = ExperimentKind::KineticSync;
  } else {
    ex.error("kind", "unknown experiment kind '" + kind +
                         "' (single, sweep, stability_pair, meanfield_convergence, kinetic_sync)");
  }

  // model
  Reader mr = root.child("model");
  std::optional<std::size_t> n;
  if (mr.has("n")) {
    const auto v = mr.uint("n");
    if (v == 0) mr.error("n", "must be >= 1");
    n = static_cast<std::size_t>(v);
  } else if (implied_n) {
    n = implied_n;
  }
  ModelRng rng;
  rng.seed_path = "model.seed";
  if (mr.has("seed")) rng.seed = mr.uint("seed");

  // the init section decides N when model.n is absent
  const json* init_src = root.has("init") ? &root.raw("init") : nullptr;
  if (!n && init_src && init_src->is_object() && init_src->contains("theta") && init_src->at("theta").is_array()) {
    n = init_src->at("theta").size();
  }
  if (!n) mr.error("n", "required field is missing");

  const auto masses = per_oscillator(mr, "mass", *n, 1.0, rng);
  const auto frictions = per_oscillator(mr, "friction", *n, 1.0, rng);
  const auto nus = per_oscillator(mr, "natural_freq", *n, 0.0, rng);
  CapacityMatrix cap = parse_capacity(mr, *n, rng);

  // init
  InitResult init = init_src ? parse_init(Reader(*init_src, resolved["init"], "init", loc), *n)
                             : parse_init(Reader(json::object(), resolved["init"], "init", loc), *n);
  cfg.init = init.state;
  cfg.init_distribution = init.dist;
  cfg.init_seed = init.seed;

  const bool has_kappa = mr.has("kappa");
  const bool has_factor = mr.has("kappa_factor_of_critical");
  if (has_kappa == has_factor) mr.error("kappa", "give exactly one of kappa and kappa_factor_of_critical");
  double kappa;
  try {
    if (has_kappa) {
      kappa = mr.number("kappa");
      cfg.params = ModelParams(masses, frictions, nus, kappa, cap);
    } else {
      const double factor = mr.number("kappa_factor_of_critical");
      const ModelParams probe(masses, frictions, nus, 1.0, cap);
      const double ks = check_theorem34(cfg.init, probe).margins.at("kappa_star");
      if (!std::isfinite(ks)) mr.error("kappa_factor_of_critical", "critical coupling is infinite for this init");
      kappa = factor * ks;
      mr.out()["kappa_resolved"] = kappa;
      cfg.params = ModelParams(masses, frictions, nus, kappa, cap);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    fail("model", e.what());
  }
  mr.finish();

  // integrator
  Reader ir = root.child_or_empty("integrator");
  cfg.integrator.dt = ir.number("dt", 1e-3);
  cfg.integrator.t_final = ir.number("t_final", 10.0);
  cfg.integrator.sample_every = ir.uint("sample_every", 1);
  try {
    cfg.integrator.scheme = scheme_from_string(ir.string("scheme", "rk4"));
    cfg.integrator.validate();
  } catch (const Error& e) {
    fail("integrator", e.what());
  }
  ir.finish();

  // analyses
  Reader ar = root.child_or_empty("analyses");
  auto& an = cfg.analyses;
  const bool homogeneous = cfg.params.variant() == ModelVariant::HomogeneousAllToAll;
  const bool zero_nu = homogeneous && cfg.params.natural_freqs()[0] == 0.0;
  const bool frameworks = cfg.params.uniform_inertia() && cfg.params.all_to_all();
  if (!ar.has("verdicts") || (ar.raw("verdicts").is_string() && ar.raw("verdicts").get<std::string>() == "auto")) {
    if (frameworks) an.verdicts = {TheoremId::T31, TheoremId::T32, TheoremId::T33};
    if (zero_nu) an.verdicts.push_back(TheoremId::T34);
    if (!homogeneous) an.verdicts.push_back(TheoremId::T35);
    ar.out()["verdicts"] = "auto";
    if (ar.has("verdicts")) ar.raw("verdicts");
  } else {
    const json& v = ar.raw("verdicts");
    if (!v.is_array()) ar.error("verdicts", "expected \"auto\" or a list such as [\"T34\"]");
    for (const auto& e : v) {
      if (!e.is_string()) ar.error("verdicts", "entries must be strings");
      const TheoremId id = theorem_from(e.get<std::string>(), ar);
      if (id == TheoremId::T34 && !zero_nu) ar.error("verdicts", "T34 needs the homogeneous all-to-all model with nu = 0");
      if ((id == TheoremId::T31 || id == TheoremId::T32 || id == TheoremId::T33) && !frameworks) {
        ar.error("verdicts", "T31-T33 need equal masses and frictions with all-to-all coupling");
      }
      an.verdicts.push_back(id);
    }
    ar.out()["verdicts"] = v;
  }
  an.a_bar = ar.optional_number("a_bar");
  if (an.a_bar && !(*an.a_bar > 0.0)) ar.error("a_bar", "must be positive");

  Reader sr = ar.child_or_empty("sync");
  an.sync.enabled = sr.boolean("enabled", true);
  an.sync.tol_freq = sr.number("tol_freq", 1e-6);
  an.sync.hold_time = sr.number("hold_time", 10.0);
  if (!(an.sync.tol_freq > 0.0)) sr.error("tol_freq", "must be positive");
  sr.finish();

  Reader cr = ar.child_or_empty("classification");
  an.classify = cr.boolean("enabled", true);
  an.tol_angle = cr.number("tol_angle", 1e-3);
  if (!(an.tol_angle > 0.0 && an.tol_angle < 3.141592653589793 / 4)) cr.error("tol_angle", "must lie in (0, pi/4)");
  cr.finish();

  if (!ar.has("monitors") || (ar.raw("monitors").is_string() && ar.raw("monitors").get<std::string>() == "auto")) {
    an.monitors = {"frequency_bound", "potential_bound"};
    if (homogeneous) {
      an.monitors.push_back("kinetic_bound");
      an.monitors.push_back("support_bound");
    }
    if (zero_nu) an.monitors.push_back("order_floor");
    ar.out()["monitors"] = "auto";
  } else {
    const json& v = ar.raw("monitors");
    if (!v.is_array()) ar.error("monitors", "expected \"auto\" or a list of monitor names");
    for (const auto& e : v) {
      if (!e.is_string() || std::find(kMonitors.begin(), kMonitors.end(), e.get<std::string>()) == kMonitors.end()) {
        ar.error("monitors", "unknown monitor (frequency_bound, kinetic_bound, potential_bound, support_bound, order_floor)");
      }
      const std::string name = e.get<std::string>();
      if ((name == "kinetic_bound" || name == "support_bound") && !homogeneous) {
        ar.error("monitors", name + " applies to the homogeneous all-to-all model only");
      }
      if (name == "order_floor" && !zero_nu) ar.error("monitors", "order_floor needs the homogeneous model with nu = 0");
      an.monitors.push_back(name);
    }
    ar.out()["monitors"] = v;
  }

  if (ar.has("decay")) {
    const json& v = ar.raw("decay");
    if (!v.is_array()) ar.error("decay", "expected a list of {quantity, t_start, t_end}");
    json list = json::array();
    for (std::size_t k = 0; k < v.size(); ++k) {
      json item;
      Reader dr(v[k], item, ar.at("decay") + "[" + std::to_string(k) + "]", loc);
      DecaySettings d;
      d.quantity = dr.string("quantity", "D_omega");
      static const std::set<std::string> q{"D_omega", "D_theta", "E_K", "E", "F"};
      if (!q.count(d.quantity)) dr.error("quantity", "expected one of D_omega, D_theta, E_K, E, F");
      d.t_start = dr.number("t_start", 0.0);
      d.t_end = dr.number("t_end", cfg.integrator.t_final);
      dr.finish();
      an.decay.push_back(d);
      list.push_back(item);
    }
    ar.out()["decay"] = list;
  } else {
    ar.out()["decay"] = json::array();
  }
  ar.finish();

  // experiment-specific fields that need the model
  if (cfg.kind == ExperimentKind::StabilityPair) {
    if (!ex.has("init_b")) ex.error("init_b", "required field is missing");
    cfg.stability.init_b = parse_init(ex.child("init_b"), *n).state;
    cfg.stability.epsilon = ex.optional_number("epsilon");
    cfg.stability.fit_t_start = ex.number("fit_t_start", 1.0);
    cfg.stability.fit_t_end = ex.number("fit_t_end", cfg.integrator.t_final);
  }
  if ((cfg.kind == ExperimentKind::MeanfieldConvergence || cfg.kind == ExperimentKind::KineticSync ||
       cfg.kind == ExperimentKind::StabilityPair) &&
      !zero_nu) {
    ex.error("kind", std::string(to_string(cfg.kind)) + " needs the homogeneous all-to-all model with nu = 0");
  }
  if ((cfg.kind == ExperimentKind::MeanfieldConvergence || cfg.kind == ExperimentKind::KineticSync) &&
      !cfg.init_distribution) {
    ex.error("kind", std::string(to_string(cfg.kind)) + " needs init.distribution");
  }
  ex.finish();

  // output (not part of the hash)
  Reader orr = root.child_or_empty("output");
  std::string dir;
  if (orr.has("dir")) {
    dir = orr.string("dir");
  } else if (const char* env = std::getenv("KURAMOTO_OUT_DIR"); env && *env) {
    dir = env;
  } else {
    dir = "out";
  }
  cfg.out_dir = dir;
  if (orr.has("formats")) {
    const json& v = orr.raw("formats");
    if (!v.is_array()) orr.error("formats", "expected a list containing \"csv\" and/or \"json\"");
    cfg.write_csv = cfg.write_json = false;
    for (const auto& e : v) {
      if (e == "csv") {
        cfg.write_csv = true;
      } else if (e == "json") {
        cfg.write_json = true;
      } else {
        orr.error("formats", "unknown format (csv, json)");
      }
    }
  }
  orr.finish();
  root.finish();

  resolved.erase("output");
  cfg.resolved = resolved;
  cfg.hash = fnv1a_hex(resolved.dump());
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

json sweep_child_document(const ExperimentConfig& config, double v) {
  json doc = config.source;
  doc["experiment"] = {{"kind", "single"}};
  const std::string& p = config.sweep.parameter;
  if (p == "kappa") {
    doc["model"].erase("kappa_factor_of_critical");
    doc["model"]["kappa"] = v;
  } else if (p == "mass" || p == "friction" || p == "natural_freq") {
    doc["model"][p] = v;
  } else if (p == "t_final" || p == "dt") {
    doc["integrator"][p] = v;
  } else if (p == "seed") {
    if (!(v >= 0.0) || v != std::floor(v)) throw Error(Errc::ConfigError, "experiment.values: seeds must be nonnegative integers");
    const auto s = static_cast<std::uint64_t>(v);
    if (doc["model"].contains("seed")) doc["model"]["seed"] = s;
    if (!(doc.contains("init") && doc["init"].contains("theta"))) doc["init"]["seed"] = s;
  }
  return doc;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::Sweep) throw Error(Errc::ConfigError, "experiment.kind is not sweep");
  std::vector<double> values = config.sweep.values;
  std::stable_sort(values.begin(), values.end());
  std::vector<ExperimentConfig> children;
  for (double v : values) children.push_back(resolve_config(sweep_child_document(config, v)));
  return children;
}

}  // namespace kuramoto
