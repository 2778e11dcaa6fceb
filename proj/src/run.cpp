#include <algorithm>
#include <chrono>
#include <cmath>

#include "kuramoto/error.hpp"
#include "kuramoto/experiment.hpp"
#include "kuramoto/observables.hpp"
#include "kuramoto/parallel.hpp"

namespace kuramoto {

using nlohmann::json;

namespace {

constexpr double kMonitorSlack = 1e-6;

json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Tracks one bound along the run; records the first and the worst excess.
struct Monitor {
  BoundViolation v;
  bool hit = false;

  void observe(double t, double value, double bound) {
    const double excess = value - bound;
    if (excess <= kMonitorSlack) return;
    if (!hit) v.first_time = t;
    hit = true;
    ++v.count;
    v.worst_excess = std::max(v.worst_excess, excess);
  }
};

double fluctuation_kinetic(const OscillatorEnsemble& s, const ModelParams& p) {
  const double wbar = mean(s.omega);
  double acc = 0.0;
  for (double w : s.omega) acc += (w - wbar) * (w - wbar);
  return 0.5 * p.masses()[0] * acc;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

HomogeneousSpec spec_of(const ModelParams& p) {
  return {p.masses()[0], p.frictions()[0], p.kappa()};
}

std::string verdict_string(const std::vector<ConditionVerdict>& vs) {
  std::string s;
  for (const auto& v : vs) {
    if (!s.empty()) s += ';';
    s += std::string(to_string(v.theorem)) + ":" + (v.satisfied ? "1" : "0");
  }
  return s;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

std::string opt_cell(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

json classification_json(const LockClassification& c) {
  return {{"kind", to_string(c.kind)}, {"k", c.k}, {"phi_star", c.phi_star}, {"residual", c.residual}};
}

}  // namespace

json to_json(const ConditionVerdict& v) {
  json margins = json::object();
  for (const auto& [k, x] : v.margins) margins[k] = num(x);
  return {{"theorem", to_string(v.theorem)}, {"satisfied", v.satisfied}, {"margins", margins}, {"failed", v.failed}};
}

json to_json(const RunReport& r) {
  json j;
  j["config_hash"] = r.config_hash;
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts) j["verdicts"].push_back(to_json(v));
  j["sync_time"] = r.sync_time ? json(*r.sync_time) : json(nullptr);
  j["classification"] = r.classification ? classification_json(*r.classification) : json(nullptr);
  j["bound_violations"] = json::array();
  for (const auto& b : r.bound_violations) {
    j["bound_violations"].push_back(
        {{"monitor", b.monitor}, {"first_time", b.first_time}, {"count", b.count}, {"worst_excess", b.worst_excess}});
  }
  j["decay_fits"] = json::array();
  for (const auto& [q, f] : r.decay_fits) {
    j["decay_fits"].push_back({{"quantity", q},
                               {"rate", num(f.rate)},
                               {"r2", num(f.r2)},
                               {"t_start", f.t_start},
                               {"t_end", f.t_end},
                               {"samples", f.samples}});
  }
  j["timings"] = r.timings;
  return j;
}

std::vector<ConditionVerdict> evaluate_verdicts(const ExperimentConfig& config) {
  std::vector<ConditionVerdict> out;
  for (TheoremId id : config.analyses.verdicts) {
    switch (id) {
      case TheoremId::T31:
      case TheoremId::T32:
      case TheoremId::T33:
        out.push_back(check_small_large_inertia(config.init, config.params, id));
        break;
      case TheoremId::T34:
        out.push_back(check_theorem34(config.init, config.params));
        break;
      case TheoremId::T35:
        out.push_back(check_theorem35(config.init, config.params, config.analyses.a_bar));
        break;
    }
  }
  return out;
}

RunReport run_single(const ExperimentConfig& config, Trajectory* keep) {
  using clock = std::chrono::steady_clock;
  const auto& p = config.params;
  const auto& an = config.analyses;
  const std::size_t n = p.size();
  RunReport rep;
  rep.config_hash = config.hash;

  auto t0 = clock::now();
  rep.verdicts = evaluate_verdicts(config);
  rep.timings["verdicts"] = seconds_since(t0);

  // monitor setup
  const bool homogeneous = p.variant() == ModelVariant::HomogeneousAllToAll;
  auto enabled = [&](const char* name) {
    return std::find(an.monitors.begin(), an.monitors.end(), name) != an.monitors.end();
  };
  std::vector<std::pair<std::string, Monitor>> monitors;
  for (const auto& name : an.monitors) monitors.push_back({name, Monitor{{name, 0.0, 0, 0.0}}});
  auto monitor = [&](const char* name) -> Monitor* {
    for (auto& [k, m] : monitors) {
      if (k == name) return &m;
    }
    return nullptr;
  };

  std::vector<double> freq_bound(n);
  for (std::size_t i = 0; i < n; ++i) {
    freq_bound[i] = std::max(std::abs(config.init.omega[i]),
                             (std::abs(p.natural_freqs()[i]) + p.kappa() * p.capacity().row_sum(i)) / p.frictions()[i]);
  }
  double potential_cap = 0.0;
  if (homogeneous) {
    potential_cap = 0.5 * p.kappa() * static_cast<double>(n);
  } else {
    for (double a : p.capacity().entries()) potential_cap += a;
    potential_cap *= p.kappa();
  }
  double kinetic_cap = 0.0, support_cap = 0.0;
  if (homogeneous) {
    const double m = p.masses()[0], g = p.frictions()[0], k = p.kappa();
    kinetic_cap = std::max(fluctuation_kinetic(config.init, p), m * m * k * k * static_cast<double>(n) / (4.0 * g * g));
    support_cap = support_bound(max_abs(config.init.omega), m, k);
  }
  std::optional<double> order_floor;
  if (enabled("order_floor")) {
    const auto v = check_theorem34(config.init, p);
    if (v.satisfied) order_floor = theorem34_order_floor(config.init, p);
  }

  // simulation with per-step monitors and sampled storage
  Trajectory traj{{}, {}, p};
  const auto schedule = make_schedule(config.integrator.dt, config.integrator.t_final);
  const std::size_t total = schedule.total();
  const std::size_t every = config.integrator.sample_every;
  std::size_t step_index = 0;
  t0 = clock::now();
  simulate(config.init, p, config.integrator, [&](double t, const OscillatorEnsemble& s) {
    if (step_index % every == 0 || step_index == total) {
      traj.times.push_back(t);
      traj.states.push_back(s);
    }
    ++step_index;
    if (auto* m = monitor("frequency_bound")) {
      double worst = -INFINITY;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(s.omega[i]) - freq_bound[i]);
      m->observe(t, worst, 0.0);
    }
    if (auto* m = monitor("potential_bound")) m->observe(t, energies(s, p).E_P, potential_cap);
    if (auto* m = monitor("kinetic_bound")) m->observe(t, fluctuation_kinetic(s, p), kinetic_cap);
    if (auto* m = monitor("support_bound")) m->observe(t, max_abs(s.omega), support_cap);
    if (order_floor) {
      if (auto* m = monitor("order_floor")) m->observe(t, *order_floor - global_order(s.theta).R, 0.0);
    }
  });
  rep.timings["simulate"] = seconds_since(t0);

  t0 = clock::now();
  for (const auto& [name, m] : monitors) {
    if (m.hit) rep.bound_violations.push_back(m.v);
  }

  std::vector<double> d_omega(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) d_omega[k] = spread(traj.states[k].omega);
  if (an.sync.enabled) {
    rep.sync_time = n <= 1 ? std::optional<double>(0.0)
                           : detect_sync(traj.times, d_omega, an.sync.tol_freq, an.sync.hold_time);
  }
  const auto& last = traj.states.back();
  if (an.classify) rep.classification = classify_lock(last.theta, an.tol_angle);

  for (const auto& d : an.decay) {
    std::vector<double> vals(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto& s = traj.states[k];
      if (d.quantity == "D_omega") {
        vals[k] = d_omega[k];
      } else if (d.quantity == "D_theta") {
        vals[k] = diameters(s, p).D_theta;
      } else if (d.quantity == "E_K") {
        vals[k] = energies(s, p).E_K;
      } else if (d.quantity == "E") {
        vals[k] = energies(s, p).E;
      } else {
        vals[k] = freq_functional(s, p);
      }
    }
    rep.decay_fits.emplace_back(d.quantity, fit_decay(traj.times, vals, d.t_start, d.t_end));
  }

  rep.final_R_p = global_order(last.theta).R;
  rep.final_D_omega = d_omega.back();
  rep.final_E = energies(last, p).E;
  rep.timings["analysis"] = seconds_since(t0);
  if (keep) *keep = std::move(traj);
  return rep;
}

namespace {

int run_single_kind(const ExperimentConfig& config) {
  Trajectory traj{{}, {}, config.params};
  RunReport rep = run_single(config, &traj);
  const auto t0 = std::chrono::steady_clock::now();
  const auto& dir = config.out_dir;
  if (config.write_csv) {
    write_file_atomic(dir / "trajectory.csv", trajectory_csv(traj));
    std::string s = "config_hash,n,t_final,sync_time,final_R_p,final_D_omega,final_E,classification,lock_residual,"
                    "bound_violations,verdicts\n";
    s += config.hash + "," + std::to_string(config.params.size()) + "," +
         format_double(config.integrator.t_final) + "," + opt_cell(rep.sync_time) + "," +
         format_double(rep.final_R_p) + "," + format_double(rep.final_D_omega) + "," + format_double(rep.final_E) +
         "," + (rep.classification ? to_string(rep.classification->kind) : "") + "," +
         (rep.classification ? format_double(rep.classification->residual) : "") + "," +
         std::to_string(rep.bound_violations.size()) + "," + verdict_string(rep.verdicts) + "\n";
    write_file_atomic(dir / "summary.csv", s);
  }
  rep.timings["write"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (config.write_json) write_file_atomic(dir / "report.json", to_json(rep).dump(2) + "\n");
  return rep.bound_violations.empty() ? 0 : 2;
}

int run_stability(const ExperimentConfig& config) {
  StabilityConfig sc;
  sc.integrator = config.integrator;
  sc.epsilon = config.stability.epsilon;
  sc.fit_t_start = config.stability.fit_t_start;
  sc.fit_t_end = config.stability.fit_t_end;
  const auto r = stability_experiment(config.init, config.stability.init_b, spec_of(config.params), sc);
  if (config.write_csv) {
    std::string s = "t,E_eps\n";
    for (std::size_t k = 0; k < r.times.size(); ++k) s += format_double(r.times[k]) + "," + format_double(r.energy[k]) + "\n";
    write_file_atomic(config.out_dir / "stability.csv", s);
  }
  if (config.write_json) {
    json j{{"config_hash", config.hash},
           {"kind", "stability_pair"},
           {"hypothesis_failed", r.hypothesis_failed},
           {"hypothesis_notes", r.hypothesis_notes},
           {"C1_sum", r.C1_sum},
           {"gamma_tilde", num(r.gamma_tilde)},
           {"gamma_tilde_alt", num(r.gamma_tilde_alt)},
           {"eps_window", {num(r.eps_lo), num(r.eps_hi)}},
           {"epsilon", r.epsilon},
           {"C0", r.C0},
           {"C1", r.C1},
           {"C2", r.C2},
           {"monotone", r.monotone},
           {"max_increase", r.max_increase},
           {"gap_decay_max", r.gap_decay_max},
           {"gap_decay_ok", r.gap_decay_ok},
           {"trapping_max", r.trapping_max},
           {"trapping_ok", r.trapping_ok}};
    j["decay_fit"] = r.decay ? json{{"rate", num(r.decay->rate)}, {"r2", num(r.decay->r2)},
                                    {"t_start", r.decay->t_start}, {"t_end", r.decay->t_end}}
                             : json(nullptr);
    write_file_atomic(config.out_dir / "experiment.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_convergence(const ExperimentConfig& config, std::size_t workers) {
  ConvergenceConfig cc;
  cc.integrator = config.integrator;
  cc.sample_interval = config.convergence.sample_interval;
  cc.n_list = config.convergence.n_list;
  cc.n_ref = config.convergence.n_ref;
  cc.seeds = config.convergence.seeds;
  cc.w2 = config.convergence.w2;
  cc.workers = workers;
  const auto r = meanfield_convergence_experiment(*config.init_distribution, spec_of(config.params), cc);
  if (config.write_csv) {
    std::string s = "n,seed,sup_w2,initial_w2,exact\n";
    for (const auto& row : r.rows) {
      s += std::to_string(row.n) + "," + std::to_string(row.seed) + "," + format_double(row.sup_w2) + "," +
           format_double(row.initial_w2) + "," + (row.exact ? "1" : "0") + "\n";
    }
    write_file_atomic(config.out_dir / "convergence.csv", s);
  }
  if (config.write_json) {
    json med = json::array();
    for (const auto& [n, v] : r.medians) med.push_back({{"n", n}, {"median_sup_w2", v}});
    json j{{"config_hash", config.hash},
           {"kind", "meanfield_convergence"},
           {"medians", med},
           {"medians_decreasing", r.medians_decreasing},
           {"C1_ref", r.C1_ref},
           {"m_kappa", r.m_kappa},
           {"bound_printed", num(r.bound_printed)},
           {"bound_alt", num(r.bound_alt)},
           {"hypothesis_failed", r.hypothesis_failed}};
    write_file_atomic(config.out_dir / "experiment.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_kinetic(const ExperimentConfig& config) {
  KineticSyncConfig kc;
  kc.integrator = config.integrator;
  kc.seed = config.init_seed;
  kc.tol_angle = config.analyses.tol_angle;
  const auto r = kinetic_sync_experiment(*config.init_distribution, config.params.size(), spec_of(config.params), kc);
  if (config.write_csv) {
    std::string s = "t,E_K,R_p\n";
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      s += format_double(r.times[k]) + "," + format_double(r.kinetic[k]) + "," + format_double(r.order[k]) + "\n";
    }
    write_file_atomic(config.out_dir / "kinetic.csv", s);
  }
  if (config.write_json) {
    json j{{"config_hash", config.hash},
           {"kind", "kinetic_sync"},
           {"condition", r.condition},
           {"condition_lhs", r.condition_lhs},
           {"condition_rhs", r.condition_rhs},
           {"R0", r.R0},
           {"max_energy_residual", r.max_energy_residual},
           {"final_kinetic", r.final_kinetic},
           {"classification", classification_json(r.classification)},
           {"c1", r.c1},
           {"c2", r.c2}};
    write_file_atomic(config.out_dir / "experiment.json", j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int run(const ExperimentConfig& config, std::size_t workers) {
  switch (config.kind) {
    case ExperimentKind::Single: return run_single_kind(config);
    case ExperimentKind::Sweep: return sweep(config, workers);
    case ExperimentKind::StabilityPair: return run_stability(config);
    case ExperimentKind::MeanfieldConvergence: return run_convergence(config, workers);
    case ExperimentKind::KineticSync: return run_kinetic(config);
  }
  return 1;
}

int sweep(const ExperimentConfig& config, std::size_t workers) {
  if (config.kind != ExperimentKind::Sweep) throw Error(Errc::ConfigError, "experiment.kind is not sweep");
  std::vector<double> values = config.sweep.values;
  std::stable_sort(values.begin(), values.end());

  struct Row {
    std::string hash;
    std::optional<RunReport> report;
    std::string error;
  };
  std::vector<Row> rows(values.size());
  parallel_for(values.size(), workers, [&](std::size_t k) {
    try {
      const auto child = resolve_config(sweep_child_document(config, values[k]));
      rows[k].hash = child.hash;
      rows[k].report = run_single(child);
    } catch (const std::exception& e) {
      rows[k].error = e.what();
    }
  });

  const TheoremId all[] = {TheoremId::T31, TheoremId::T32, TheoremId::T33, TheoremId::T34, TheoremId::T35};
  std::string csv = config.sweep.parameter + ",config_hash,status,sync_time,final_R_p,final_D_omega,final_E";
  for (TheoremId id : all) csv += std::string(",verdict_") + to_string(id);
  csv += ",bound_violations,error\n";
  json reports = json::array();
  int code = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    csv += format_double(values[k]) + "," + row.hash + ",";
    if (!row.report) {
      csv += "error,,,,";
      for (std::size_t t = 0; t < std::size(all); ++t) csv += ",";
      csv += "," + csv_quote(row.error) + "\n";
      reports.push_back({{"value", values[k]}, {"error", row.error}});
      code = 1;
      continue;
    }
    const auto& r = *row.report;
    csv += "ok," + opt_cell(r.sync_time) + "," + format_double(r.final_R_p) + "," + format_double(r.final_D_omega) +
           "," + format_double(r.final_E);
    for (TheoremId id : all) {
      csv += ",";
      for (const auto& v : r.verdicts) {
        if (v.theorem == id) csv += v.satisfied ? "1" : "0";
      }
    }
    csv += "," + std::to_string(r.bound_violations.size()) + ",\n";
    json j = to_json(r);
    j["value"] = values[k];
    j.erase("timings");
    reports.push_back(j);
    if (!r.bound_violations.empty() && code == 0) code = 2;
  }
  if (config.write_csv) write_file_atomic(config.out_dir / "sweep.csv", csv);
  if (config.write_json) {
    json j{{"config_hash", config.hash}, {"parameter", config.sweep.parameter}, {"runs", reports}};
    write_file_atomic(config.out_dir / "sweep.json", j.dump(2) + "\n");
  }
  return code;
}

}  // namespace kuramoto
