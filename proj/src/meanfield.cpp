#include "kuramoto/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <tuple>

#include "kuramoto/assignment.hpp"
#include "kuramoto/error.hpp"
#include "kuramoto/observables.hpp"
#include "kuramoto/parallel.hpp"

namespace kuramoto {

using std::numbers::pi;

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> theta, std::vector<double> omega)
    : theta_(std::move(theta)), omega_(std::move(omega)) {
  OscillatorEnsemble{theta_, omega_}.validate();
  for (double& t : theta_) t = wrap_two_pi(t);
}

EmpiricalMeasure EmpiricalMeasure::from_state(const OscillatorEnsemble& s) {
  return EmpiricalMeasure(s.theta, s.omega);
}

std::string distribution_name(const InitialDistribution& d) {
  struct {
    std::string operator()(const ArcUniform&) const { return "arc_uniform"; }
    std::string operator()(const VonMisesGaussian&) const { return "von_mises_gaussian"; }
    std::string operator()(const TwoPole&) const { return "two_pole"; }
    std::string operator()(const Splay&) const { return "splay"; }
  } name;
  return std::visit(name, d);
}

void validate(const InitialDistribution& d) {
  auto bad = [](const char* what) { throw Error(Errc::InvalidParameter, what); };
  if (const auto* a = std::get_if<ArcUniform>(&d)) {
    if (!(a->halfwidth > 0.0 && a->halfwidth < pi)) bad("arc halfwidth must lie in (0, pi)");
    if (!(a->omega_halfwidth >= 0.0)) bad("omega halfwidth must be >= 0");
    if (!std::isfinite(a->center) || !std::isfinite(a->omega_value)) bad("arc parameters must be finite");
  } else if (const auto* v = std::get_if<VonMisesGaussian>(&d)) {
    if (!(v->concentration >= 0.0)) bad("von Mises concentration must be >= 0");
    if (!(v->omega_sigma >= 0.0)) bad("omega sigma must be >= 0");
    if (!(v->omega_cutoff > 0.0)) bad("omega cutoff must be > 0");
  } else if (const auto* t = std::get_if<TwoPole>(&d)) {
    if (!(t->c1 > 0.5 && t->c1 <= 1.0)) bad("two-pole c1 must lie in (1/2, 1]");
    if (!std::isfinite(t->phi_star)) bad("two-pole phi_star must be finite");
  } else if (const auto* s = std::get_if<Splay>(&d)) {
    if (!std::isfinite(s->offset) || !std::isfinite(s->span)) bad("splay parameters must be finite");
  }
}

namespace {

// Best and Fisher (1979) rejection sampler.
double sample_von_mises(std::mt19937_64& rng, double mu, double kappa) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (kappa < 1e-8) return mu + pi * (2.0 * u(rng) - 1.0);
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = u(rng);
    const double u2 = u(rng);
    const double u3 = u(rng);
    const double z = std::cos(pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      return mu + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(std::clamp(f, -1.0, 1.0));
    }
  }
}

}  // namespace

OscillatorEnsemble sample_initial(const InitialDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::InvalidParameter, "sample size must be >= 1");
  validate(dist);
  OscillatorEnsemble s{std::vector<double>(n), std::vector<double>(n)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  if (const auto* a = std::get_if<ArcUniform>(&dist)) {
    for (std::size_t j = 0; j < n; ++j) {
      s.theta[j] = a->center + a->halfwidth * unit(rng);
      s.omega[j] = a->omega_halfwidth > 0.0 ? a->omega_value + a->omega_halfwidth * unit(rng) : a->omega_value;
    }
  } else if (const auto* v = std::get_if<VonMisesGaussian>(&dist)) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      s.theta[j] = sample_von_mises(rng, v->mu, v->concentration);
      double w;
      do {
        w = v->omega_sigma * gauss(rng);
      } while (std::abs(w) > v->omega_cutoff);
      s.omega[j] = w;
    }
  } else if (const auto* t = std::get_if<TwoPole>(&dist)) {
    const auto k = static_cast<std::size_t>(std::llround(t->c1 * static_cast<double>(n)));
    for (std::size_t j = 0; j < n; ++j) s.theta[j] = j < k ? t->phi_star : t->phi_star + pi;
  } else if (const auto* sp = std::get_if<Splay>(&dist)) {
    for (std::size_t j = 0; j < n; ++j) {
      s.theta[j] = sp->offset + sp->span * static_cast<double>(j) / static_cast<double>(n);
    }
  }
  return s;
}

double ground_cost(double theta_a, double omega_a, double theta_b, double omega_b) noexcept {
  const double d = std::abs(wrap_pi(theta_a - theta_b));
  const double w = omega_a - omega_b;
  return d * d + w * w;
}

namespace {

// Squared W2 between two equal-weight 1D samples of possibly different sizes,
// integrating the squared difference of the quantile functions.
double w2_sq_1d(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::size_t i = 0;
  std::size_t j = 0;
  double acc = 0.0;
  double t = 0.0;
  while (i < n && j < m) {
    const double d = a[i] - b[j];
    // next breakpoints (i+1)/n and (j+1)/m compared exactly in integers
    const std::size_t lhs = (i + 1) * m;
    const std::size_t rhs = (j + 1) * n;
    double next;
    if (lhs < rhs) {
      next = static_cast<double>(i + 1) / static_cast<double>(n);
      ++i;
    } else if (rhs < lhs) {
      next = static_cast<double>(j + 1) / static_cast<double>(m);
      ++j;
    } else {
      next = static_cast<double>(i + 1) / static_cast<double>(n);
      ++i;
      ++j;
    }
    acc += (next - t) * d * d;
    t = next;
  }
  return acc;
}

}  // namespace

W2Result sliced_wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const W2Options& opt) {
  if (opt.projections == 0) throw Error(Errc::InvalidParameter, "sliced estimator needs projections >= 1");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> pa(mu.size()), pb(nu.size()), sq(opt.projections);
  for (std::size_t l = 0; l < opt.projections; ++l) {
    double d[3];
    double norm;
    do {
      for (double& x : d) x = gauss(rng);
      norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    } while (norm < 1e-12);
    for (double& x : d) x /= norm;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      pa[i] = d[0] * std::cos(mu.theta()[i]) + d[1] * std::sin(mu.theta()[i]) + d[2] * mu.omega()[i];
    }
    for (std::size_t i = 0; i < nu.size(); ++i) {
      pb[i] = d[0] * std::cos(nu.theta()[i]) + d[1] * std::sin(nu.theta()[i]) + d[2] * nu.omega()[i];
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    sq[l] = w2_sq_1d(pa, pb);
  }
  const double m = mean(sq);
  double var = 0.0;
  for (double x : sq) var += (x - m) * (x - m);
  W2Result r;
  r.value = std::sqrt(m);
  r.exact = false;
  r.stderr_sq = sq.size() > 1 ? std::sqrt(var / static_cast<double>(sq.size() - 1) / static_cast<double>(sq.size())) : 0.0;
  return r;
}

W2Result wasserstein2_detailed(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const W2Options& opt) {
  if (mu.size() == 0 || nu.size() == 0) throw Error(Errc::InvalidParameter, "W2 of an empty measure");
  // evaluate in a canonical argument order so the result is exactly symmetric
  if (std::tie(nu.theta(), nu.omega()) < std::tie(mu.theta(), mu.omega())) return wasserstein2_detailed(nu, mu, opt);
  if (mu.size() != nu.size() || mu.size() > opt.exact_cap) return sliced_wasserstein2(mu, nu, opt);
  const std::size_t n = mu.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = ground_cost(mu.theta()[i], mu.omega()[i], nu.theta()[j], nu.omega()[j]);
    }
  }
  const Assignment a = solve_assignment(cost, n);
  return {std::sqrt(std::max(0.0, a.cost) / static_cast<double>(n)), true, 0.0};
}

double wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const W2Options& opt) {
  return wasserstein2_detailed(mu, nu, opt).value;
}

EpsilonEnergyReport epsilon_energy(std::span<const double> X, std::span<const double> V, double epsilon,
                                   double m, double gamma) {
  if (X.size() != V.size()) throw Error(Errc::DimensionMismatch, "X and V differ in length");
  EpsilonEnergyReport r;
  r.epsilon = epsilon;
  for (std::size_t i = 0; i < X.size(); ++i) {
    r.xx += X[i] * X[i];
    r.vv += V[i] * V[i];
    r.xv += X[i] * V[i];
  }
  r.value = epsilon * gamma * r.xx + 2.0 * m * epsilon * r.xv + m * r.vv;
  const double a = epsilon * gamma;
  const double b = m * epsilon;
  const double c = m;
  const double mid = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  r.C0 = mid - rad;
  r.C1 = mid + rad;
  return r;
}

namespace {

double gamma_tilde(double S) { return S == 0.0 ? 2.0 : std::sin(2.0 * S) / S; }
double gamma_tilde_alt(double S) { return S == 0.0 ? 1.0 : std::sin(S) / S; }

}  // namespace

StabilityReport stability_experiment(const OscillatorEnsemble& init_a, const OscillatorEnsemble& init_b,
                                     const HomogeneousSpec& spec, const StabilityConfig& config) {
  if (init_a.size() != init_b.size()) throw Error(Errc::DimensionMismatch, "paired ensembles differ in size");
  const ModelParams params = spec.params(init_a.size());
  const OscillatorEnsemble a0 = comoving_shift(init_a, params);
  const OscillatorEnsemble b0 = comoving_shift(init_b, params);
  const double m = spec.m;
  const double gamma = spec.gamma;
  const double kappa = spec.kappa;

  StabilityReport r;
  r.C1_sum = diameters(a0, params).C1 + diameters(b0, params).C1;
  const double S = r.C1_sum;
  r.gamma_tilde = gamma_tilde(S);
  r.gamma_tilde_alt = gamma_tilde_alt(S);
  r.eps_hi = (2.0 * gamma - 1.0) / (2.0 * m);
  r.eps_lo = r.gamma_tilde > 0.0 ? kappa / (2.0 * r.gamma_tilde) : std::numeric_limits<double>::infinity();

  auto note = [&](const char* msg) {
    r.hypothesis_failed = true;
    r.hypothesis_notes.emplace_back(msg);
  };
  if (!(S < pi)) note("C1(0) + C1~(0) >= pi");
  if (!(gamma > 0.5)) note("gamma <= 1/2");
  if (!(r.gamma_tilde > 0.0)) note("Gamma~ <= 0");
  if (!(m * kappa <= r.gamma_tilde)) note("m kappa > Gamma~");
  const bool window = r.eps_lo <= r.eps_hi;
  if (!window) note("epsilon window is empty");

  if (config.epsilon) {
    r.epsilon = *config.epsilon;
    if (window && (r.epsilon < r.eps_lo || r.epsilon > r.eps_hi)) note("epsilon outside its window");
  } else {
    r.epsilon = window ? 0.5 * (r.eps_lo + r.eps_hi) : gamma / (4.0 * m);
  }
  r.C2 = std::min(2.0 * gamma - 1.0 - 2.0 * m * r.epsilon, kappa * (2.0 * r.gamma_tilde * r.epsilon - kappa));

  const Trajectory ta = simulate(a0, params, config.integrator);
  const Trajectory tb = simulate(b0, params, config.integrator);
  const std::size_t n = a0.size();
  std::vector<double> X(n), V(n);
  double prev_norm = 0.0;
  for (std::size_t k = 0; k < ta.size(); ++k) {
    const auto& sa = ta.states[k];
    const auto& sb = tb.states[k];
    for (std::size_t i = 0; i < n; ++i) {
      X[i] = sa.theta[i] - sb.theta[i];
      V[i] = sa.omega[i] - sb.omega[i];
    }
    const auto e = epsilon_energy(X, V, r.epsilon, m, gamma);
    if (k == 0) {
      r.C0 = e.C0;
      r.C1 = e.C1;
    }
    const double norm = e.xx + e.vv;
    if (k > 0) {
      const double dE = e.value - r.energy.back();
      r.max_increase = std::max(r.max_increase, dE);
      if (dE > 1e-9) r.monotone = false;
      const double dt = ta.times[k] - ta.times[k - 1];
      const double lhs = dE + r.C2 * 0.5 * (norm + prev_norm) * dt;
      r.gap_decay_max = k == 1 ? lhs : std::max(r.gap_decay_max, lhs);
    }
    prev_norm = norm;
    r.times.push_back(ta.times[k]);
    r.energy.push_back(e.value);
    r.trapping_max = std::max(r.trapping_max, spread(sa.theta) + spread(sb.theta));
  }
  r.gap_decay_ok = r.gap_decay_max <= 1e-6;
  r.trapping_ok = r.trapping_max <= S + 1e-6;
  try {
    r.decay = fit_decay(r.times, r.energy, config.fit_t_start, config.fit_t_end);
  } catch (const Error&) {
    r.decay.reset();  // identical pairs or a window outside the run
  }
  return r;
}

ConvergenceReport meanfield_convergence_experiment(const InitialDistribution& dist, const HomogeneousSpec& spec,
                                                   const ConvergenceConfig& config) {
  if (config.n_list.empty()) throw Error(Errc::InvalidParameter, "n_list must not be empty");
  if (config.seeds.empty()) throw Error(Errc::InvalidParameter, "at least one seed is required");
  for (std::size_t n : config.n_list) {
    if (n == 0 || n > config.n_ref) throw Error(Errc::InvalidParameter, "each N must lie in [1, n_ref]");
  }
  config.integrator.validate();
  if (!(config.sample_interval > 0.0)) throw Error(Errc::InvalidParameter, "sample_interval must be positive");
  IntegratorConfig integ = config.integrator;
  integ.sample_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.sample_interval / integ.dt)));

  const std::size_t n_rows = config.n_list.size();
  std::vector<ConvergenceRow> rows(config.seeds.size() * n_rows);
  std::vector<double> c1_per_seed(config.seeds.size());

  parallel_for(config.seeds.size(), config.workers, [&](std::size_t s) {
    const std::uint64_t seed = config.seeds[s];
    const OscillatorEnsemble ref0 = sample_initial(dist, config.n_ref, seed);
    const ModelParams pref = spec.params(config.n_ref);
    c1_per_seed[s] = diameters(ref0, pref).C1;
    const Trajectory ref = simulate(ref0, pref, integ);
    std::vector<EmpiricalMeasure> ref_measures;
    ref_measures.reserve(ref.size());
    for (const auto& st : ref.states) ref_measures.push_back(EmpiricalMeasure::from_state(st));

    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::size_t n = config.n_list[r];
      OscillatorEnsemble sub{std::vector<double>(ref0.theta.begin(), ref0.theta.begin() + static_cast<long>(n)),
                             std::vector<double>(ref0.omega.begin(), ref0.omega.begin() + static_cast<long>(n))};
      const Trajectory tr = simulate(sub, spec.params(n), integ);
      ConvergenceRow row;
      row.n = n;
      row.seed = seed;
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const W2Result w = wasserstein2_detailed(EmpiricalMeasure::from_state(tr.states[k]), ref_measures[k], config.w2);
        row.exact = row.exact && w.exact;
        if (k == 0) row.initial_w2 = w.value;
        row.sup_w2 = std::max(row.sup_w2, w.value);
      }
      rows[s * n_rows + r] = row;
    }
  });

  ConvergenceReport rep;
  rep.rows = std::move(rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<double> v;
    for (std::size_t s = 0; s < config.seeds.size(); ++s) v.push_back(rep.rows[s * n_rows + r].sup_w2);
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    const double med = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    rep.medians.emplace_back(config.n_list[r], med);
  }
  rep.medians_decreasing = true;
  for (std::size_t r = 1; r < rep.medians.size(); ++r) {
    if (!(rep.medians[r].second < rep.medians[r - 1].second)) rep.medians_decreasing = false;
  }
  rep.C1_ref = c1_per_seed.front();
  rep.m_kappa = spec.m * spec.kappa;
  const double c1 = rep.C1_ref;
  rep.bound_printed = c1 > 0.0 ? std::sin(4.0 * c1) / (2.0 * c1) : 2.0;
  rep.bound_alt = c1 > 0.0 ? std::sin(2.0 * c1) / (2.0 * c1) : 1.0;
  rep.hypothesis_failed = !(c1 > 0.0 && c1 < pi / 2) || !(rep.m_kappa <= rep.bound_printed);
  return rep;
}

std::pair<double, double> propagation_of_averages(double mean_theta, double mean_omega, double m, double gamma,
                                                  double t) {
  const MeanState s = mean_closed_form(t, mean_theta, mean_omega, m, gamma, 0.0);
  return {s.theta_c, s.omega_c};
}

double support_bound(double omega_max, double m, double kappa) { return std::max(omega_max, m * kappa); }

KineticSyncReport kinetic_sync_experiment(const InitialDistribution& dist, std::size_t n,
                                          const HomogeneousSpec& spec, const KineticSyncConfig& config) {
  const OscillatorEnsemble init = sample_initial(dist, n, config.seed);
  const ModelParams params = spec.params(n);
  KineticSyncReport r;
  const auto nd = static_cast<double>(n);
  double sq = 0.0;
  for (double w : init.omega) sq += w * w;
  r.R0 = global_order(init.theta, 0.0).R;
  r.condition_lhs = spec.m / nd * sq;
  r.condition_rhs = spec.kappa * r.R0 * r.R0;
  r.condition = r.condition_lhs <= r.condition_rhs;

  const double scale = std::max(1.0, energies(init, params).E);
  std::size_t count = 0;
  double prev_t = 0.0;
  EnergyReport prev{};
  const std::size_t total = make_schedule(config.integrator.dt, config.integrator.t_final).total();
  const OscillatorEnsemble last = simulate(init, params, config.integrator, [&](double t, const OscillatorEnsemble& s) {
    const EnergyReport e = energies(s, params);
    if (count > 0) {
      const double res = e.E - prev.E + (spec.gamma / spec.m) * (e.E_K + prev.E_K) * (t - prev_t);
      r.max_energy_residual = std::max(r.max_energy_residual, std::abs(res) / scale);
    }
    if (count % config.integrator.sample_every == 0 || count == total) {
      r.times.push_back(t);
      r.kinetic.push_back(e.E_K);
      r.order.push_back(global_order(s.theta).R);
    }
    prev = e;
    prev_t = t;
    ++count;
  });
  r.final_kinetic = r.kinetic.back();
  r.classification = classify_lock(last.theta, config.tol_angle);
  if (r.classification.kind == LockKind::Bipolar || r.classification.kind == LockKind::OnePointCluster) {
    r.c1 = static_cast<double>(r.classification.k) / nd;
    r.c2 = 1.0 - r.c1;
  }
  return r;
}

}  // namespace kuramoto
