#include "kuramoto/sync_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>

#include "kuramoto/error.hpp"
#include "kuramoto/observables.hpp"

namespace kuramoto {

using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(ConditionVerdict& v, bool ok, const char* name) {
  if (!ok) v.failed.emplace_back(name);
}

void finish(ConditionVerdict& v) { v.satisfied = v.failed.empty(); }

double kinetic_sum(const OscillatorEnsemble& s, const ModelParams& p) {
  double k = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) k += p.masses()[i] * s.omega[i] * s.omega[i];
  return k;
}

// sum_ij a_ij cos(theta_i - theta_j), written as total weight minus the (accurate) dissonance
double weighted_cos_sum(std::span<const double> theta, const CapacityMatrix& A) {
  const auto e = A.entries();
  return std::accumulate(e.begin(), e.end(), 0.0) - interaction_sum(theta, A);
}

BoundSet bounds_for(double J0, double a_bar, double delta, double n) {
  BoundSet b;
  b.J0 = J0;
  b.Rp_sq = (J0 - delta * n) / (a_bar * n * n);
  const double radicand = a_bar * (J0 - 3.0 * delta * n) - delta * delta;
  b.Rpi = radicand > 0.0 ? std::sqrt(radicand) : kNaN;
  const double gap = J0 - delta * n;
  b.C0 = gap > 0.0 ? std::sqrt(a_bar * a_bar * n * n +
                               a_bar * n * n * (2.0 * a_bar * delta * n + delta * delta) / gap)
                   : kNaN;
  b.cos_bound = radicand > 0.0 && std::isfinite(b.C0) ? a_bar * n / b.C0 - b.C0 * delta / radicand : kNaN;
  b.valid = b.Rp_sq > 0.0 && radicand > 0.0;
  return b;
}

HeteroBounds compute_bounds(const OscillatorEnsemble& init, const ModelParams& params, double a_bar,
                            double delta) {
  const auto n = static_cast<double>(init.size());
  const double cos_sum = weighted_cos_sum(init.theta, params.capacity());
  const double kin = kinetic_sum(init, params);
  HeteroBounds h;
  h.a_bar = a_bar;
  h.delta = delta;
  h.half_kappa = bounds_for(0.5 * params.kappa() * cos_sum - 0.5 * kin, a_bar, delta, n);
  h.unscaled = bounds_for(cos_sum - kin, a_bar, delta, n);
  return h;
}

void require_homogeneous_inertia(const ModelParams& params, const char* what) {
  if (!params.uniform_inertia() || !params.all_to_all()) {
    throw Error(Errc::WrongVariant,
                std::string(what) + " needs equal masses and frictions with all-to-all coupling");
  }
}

}  // namespace

const char* to_string(TheoremId id) noexcept {
  switch (id) {
    case TheoremId::T31: return "T31";
    case TheoremId::T32: return "T32";
    case TheoremId::T33: return "T33";
    case TheoremId::T34: return "T34";
    case TheoremId::T35: return "T35";
  }
  return "?";
}

const char* to_string(LockKind k) noexcept {
  switch (k) {
    case LockKind::OnePointCluster: return "OnePointCluster";
    case LockKind::Bipolar: return "Bipolar";
    case LockKind::ZeroOrderParameter: return "ZeroOrderParameter";
    case LockKind::Unclassified: return "Unclassified";
  }
  return "?";
}

ConditionVerdict check_theorem34(const OscillatorEnsemble& init, const ModelParams& params) {
  check_dimensions(init, params);
  if (params.variant() != ModelVariant::HomogeneousAllToAll || params.natural_freqs()[0] != 0.0) {
    throw Error(Errc::WrongVariant, "T34 check needs the homogeneous all-to-all model with nu = 0");
  }
  const double m = params.masses()[0];
  const double kappa = params.kappa();
  const auto n = static_cast<double>(init.size());
  double sq = 0.0;
  for (double w : init.omega) sq += w * w;
  const double lhs = m / n * sq;
  const double R = global_order(init.theta, 0.0).R;

  ConditionVerdict v;
  v.theorem = TheoremId::T34;
  v.margins["lhs"] = lhs;
  v.margins["kappa_R_sq"] = kappa * R * R;
  v.margins["R_p0"] = R;
  v.margins["kappa"] = kappa;
  // below the degeneracy threshold R is treated as zero: no finite kappa suffices
  v.margins["kappa_star"] = lhs == 0.0 ? 0.0 : (R >= kDegenerateOrder ? lhs / (R * R) : kInf);
  require(v, kappa > 0.0, "kappa");
  // lhs <= kappa R^2 stated against the reported threshold, so a sweep flips exactly at kappa_star
  require(v, kappa >= v.margins["kappa_star"], "lhs");
  finish(v);
  return v;
}

double theorem34_order_floor(const OscillatorEnsemble& init, const ModelParams& params) {
  check_dimensions(init, params);
  const double R = global_order(init.theta, 0.0).R;
  const double ek = 0.5 * kinetic_sum(init, params);
  const double radicand = R * R - 2.0 * ek / (params.kappa() * static_cast<double>(init.size()));
  return radicand >= 0.0 ? std::sqrt(radicand) : kNaN;
}

double default_a_bar(const CapacityMatrix& A) {
  const std::size_t n = A.size();
  if (n == 1) return A(0, 0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) s += A(i, j);
  return s / static_cast<double>(n * (n - 1));
}

double capacity_deviation(const CapacityMatrix& A, double a_bar) {
  double worst = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    double s = 0.0;
    for (double a : A.row(i)) s += std::abs(a - a_bar);
    worst = std::max(worst, s);
  }
  return worst;
}

ConditionVerdict check_theorem35(const OscillatorEnsemble& init, const ModelParams& params,
                                 std::optional<double> a_bar) {
  check_dimensions(init, params);
  const double ab = a_bar.value_or(default_a_bar(params.capacity()));
  if (!(ab > 0.0) || !std::isfinite(ab)) throw Error(Errc::InvalidParameter, "a_bar must be positive");
  const double delta = capacity_deviation(params.capacity(), ab);
  const auto n = static_cast<double>(init.size());
  const double lhs = weighted_cos_sum(init.theta, params.capacity());
  const double kin = kinetic_sum(init, params);
  const double rhs = kin + 3.0 * delta * n + delta * delta / ab;

  ConditionVerdict v;
  v.theorem = TheoremId::T35;
  v.margins["lhs"] = lhs;
  v.margins["rhs"] = rhs;
  v.margins["a_bar"] = ab;
  v.margins["delta"] = delta;
  v.margins["kinetic"] = kin;
  const HeteroBounds h = compute_bounds(init, params, ab, delta);
  for (const auto& [k, x] : h.to_map()) {
    if (k != "a_bar" && k != "delta") v.margins[k] = x;
  }
  require(v, lhs >= rhs, "lhs");
  finish(v);
  return v;
}

double sin_root(double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0) throw Error(Errc::InvalidParameter, "sin_root needs ratio in (0, 1]");
  if (ratio == 1.0) return pi / 2;
  double lo = 0.0;
  double hi = pi / 2;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (std::sin(mid) < ratio ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ConditionVerdict check_small_large_inertia(const OscillatorEnsemble& init, const ModelParams& params,
                                           TheoremId framework) {
  check_dimensions(init, params);
  require_homogeneous_inertia(params, "inertia framework check");
  const double m = params.masses()[0];
  const double gamma = params.frictions()[0];
  const double kappa = params.kappa();
  const DiameterReport d = diameters(init, params);

  ConditionVerdict v;
  v.theorem = framework;
  v.margins["gamma"] = gamma;
  v.margins["m_kappa"] = m * kappa;
  v.margins["D_nu"] = d.D_nu;
  require(v, gamma == 1.0, "gamma");

  switch (framework) {
    case TheoremId::T31: {
      const double c1 = d.C1;
      v.margins["C1_0"] = c1;
      v.margins["m_kappa_small_upper"] = 0.25;
      const double large = c1 > 0.0 && c1 < pi ? c1 / (4.0 * std::sin(c1)) : kNaN;
      v.margins["m_kappa_large_lower"] = large;
      require(v, c1 > 0.0 && c1 < pi, "C1_0");
      const double mk = m * kappa;
      require(v, (mk > 0.0 && mk < 0.25) || (std::isfinite(large) && mk > large), "m_kappa");
      break;
    }
    case TheoremId::T32: {
      const double ratio = kappa > 0.0 ? d.D_nu / kappa : kInf;
      v.margins["kappa"] = kappa;
      v.margins["D_nu_over_kappa"] = ratio;
      v.margins["C2_0"] = d.C2;
      double d_inf = kNaN;
      if (ratio > 0.0 && ratio <= 1.0) d_inf = sin_root(ratio);
      v.margins["D_inf_1"] = d_inf;
      const double mk_upper = std::isfinite(d_inf) ? d_inf / (4.0 * std::sin(d_inf)) : kNaN;
      v.margins["m_kappa_upper"] = mk_upper;
      require(v, d.D_nu > 0.0 && d.D_nu < kappa, "D_nu");
      require(v, m * kappa > 0.0 && std::isfinite(mk_upper) && m * kappa < mk_upper, "m_kappa");
      require(v, d.C2 > 0.0 && std::isfinite(d_inf) && d.C2 < d_inf, "C2_0");
      break;
    }
    case TheoremId::T33: {
      const double d_upper = pi / (8.0 * m);
      v.margins["D_nu_upper"] = d_upper;
      v.margins["m_kappa_lower"] = pi / 8.0;
      v.margins["C2_0"] = d.C2;
      v.margins["C2_upper"] = 4.0 * m * d.D_nu;
      require(v, d.D_nu > 0.0 && d.D_nu < d_upper, "D_nu");
      require(v, m * kappa >= pi / 8.0, "m_kappa");
      require(v, d.C2 > 0.0 && d.C2 < 4.0 * m * d.D_nu, "C2_0");
      break;
    }
    default:
      throw Error(Errc::InvalidParameter, "framework must be one of T31, T32, T33");
  }
  finish(v);
  return v;
}

LockClassification classify_lock(std::span<const double> theta, double tol_angle) {
  if (theta.empty()) throw Error(Errc::DimensionMismatch, "cannot classify an empty ensemble");
  if (!(tol_angle > 0.0 && tol_angle < pi / 4)) {
    throw Error(Errc::InvalidParameter, "tol_angle must lie in (0, pi/4)");
  }
  const std::size_t n = theta.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = wrap_two_pi(theta[i]);

  auto pole_distance = [](double x, double c) {
    const double d = std::abs(wrap_pi(x - c));
    return std::min(d, pi - d);
  };

  double best_c = 0.0;
  double best_total = kInf;
  for (std::size_t k = 0; k < n; ++k) {
    for (double c : {w[k], w[k] + pi}) {
      double total = 0.0;
      for (double x : w) total += pole_distance(x, c);
      if (total < best_total) {
        best_total = total;
        best_c = c;
      }
    }
  }

  // Refine: circular mean of the offsets after folding the far pole onto the near one.
  double cs = 0.0;
  double sn = 0.0;
  for (double x : w) {
    double off = wrap_pi(x - best_c);
    if (std::abs(off) > pi / 2) off = wrap_pi(off - pi);
    cs += std::cos(off);
    sn += std::sin(off);
  }
  double phi = best_c + std::atan2(sn, cs);

  std::size_t near = 0;
  double residual = 0.0;
  for (double x : w) {
    if (std::abs(wrap_pi(x - phi)) <= pi / 2) ++near;
    residual = std::max(residual, pole_distance(x, phi));
  }
  if (2 * near < n) {
    phi += pi;
    near = n - near;
  }

  LockClassification out;
  out.k = near;
  out.phi_star = wrap_two_pi(phi);
  out.residual = residual;
  const bool zero_order = global_order(theta).degenerate;
  if (residual <= tol_angle && 2 * near > n) {
    out.kind = near == n ? LockKind::OnePointCluster : LockKind::Bipolar;
  } else {
    out.kind = zero_order ? LockKind::ZeroOrderParameter : LockKind::Unclassified;
  }
  return out;
}

std::optional<double> detect_sync(std::span<const double> times, std::span<const double> freq_spread,
                                  double tol_freq, double hold_time) {
  if (!(tol_freq > 0.0)) throw Error(Errc::InvalidParameter, "tol_freq must be positive");
  if (times.size() != freq_spread.size()) {
    throw Error(Errc::DimensionMismatch, "times and frequency spreads differ in length");
  }
  if (times.empty()) return std::nullopt;
  std::size_t start = times.size();
  while (start > 0 && freq_spread[start - 1] <= tol_freq) --start;
  if (start == times.size()) return std::nullopt;
  if (times.back() - times[start] < hold_time) return std::nullopt;
  return times[start];
}

std::optional<double> detect_sync(const Trajectory& traj, double tol_freq, double hold_time) {
  if (!traj.states.empty() && traj.states.front().size() == 1) return 0.0;
  std::vector<double> spreads(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) spreads[k] = spread(traj.states[k].omega);
  return detect_sync(traj.times, spreads, tol_freq, hold_time);
}

std::map<std::string, double> HeteroBounds::to_map() const {
  std::map<std::string, double> m{{"a_bar", a_bar}, {"delta", delta}};
  for (const auto& [tag, b] : {std::pair<const char*, const BoundSet*>{"half_kappa", &half_kappa},
                               {"unscaled", &unscaled}}) {
    const std::string p = tag;
    m[p + ".J0"] = b->J0;
    m[p + ".Rp_sq_bound"] = b->Rp_sq;
    m[p + ".Rpi_bound"] = b->Rpi;
    m[p + ".C0"] = b->C0;
    m[p + ".cos_bound"] = b->cos_bound;
  }
  return m;
}

HeteroBounds hetero_lower_bounds(const OscillatorEnsemble& init, const ModelParams& params,
                                 double a_bar, double delta) {
  check_dimensions(init, params);
  if (!(a_bar > 0.0)) throw Error(Errc::InvalidParameter, "a_bar must be positive");
  if (!(delta >= 0.0)) throw Error(Errc::InvalidParameter, "delta must be nonnegative");
  HeteroBounds h = compute_bounds(init, params, a_bar, delta);
  if (!h.half_kappa.valid && !h.unscaled.valid) {
    throw Error(Errc::InsufficientMargin,
                "order-parameter lower bounds are nonpositive under both J0 conventions");
  }
  return h;
}

std::vector<double> gronwall_envelope(double y0, double alpha, std::span<const double> beta,
                                      std::span<const double> t_grid) {
  if (!(alpha > 0.0)) throw Error(Errc::InvalidParameter, "alpha must be positive");
  if (beta.size() != t_grid.size()) throw Error(Errc::DimensionMismatch, "beta and grid differ in length");
  const std::size_t n = t_grid.size();
  double sup = 0.0;
  for (double b : beta) sup = std::max(sup, std::abs(b));

  std::vector<double> env(n);
  std::deque<std::size_t> window;  // indices with decreasing |beta|
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && t_grid[i] < t_grid[i - 1]) throw Error(Errc::InvalidParameter, "grid must be nondecreasing");
    while (!window.empty() && std::abs(beta[window.back()]) <= std::abs(beta[i])) window.pop_back();
    window.push_back(i);
    const double half = 0.5 * t_grid[i];
    while (lo + 1 <= i && t_grid[lo + 1] <= half) ++lo;
    while (window.front() < lo) window.pop_front();
    const double t = t_grid[i];
    env[i] = y0 * std::exp(-alpha * t) + std::abs(beta[window.front()]) / alpha +
             sup / alpha * std::exp(-0.5 * alpha * t);
  }
  return env;
}

DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_start,
                   double t_end) {
  if (times.size() != values.size()) throw Error(Errc::DimensionMismatch, "times and values differ in length");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_start || times[k] > t_end) continue;
    if (!(values[k] > 0.0)) {
      throw Error(Errc::InvalidParameter, "fit_decay needs positive samples (t=" + std::to_string(times[k]) + ")");
    }
    x.push_back(times[k]);
    y.push_back(std::log(values[k]));
  }
  if (x.size() < 2) throw Error(Errc::InvalidParameter, "fit window holds fewer than two samples");
  const double xm = mean(x);
  const double ym = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - xm) * (x[k] - xm);
    sxy += (x[k] - xm) * (y[k] - ym);
    syy += (y[k] - ym) * (y[k] - ym);
  }
  if (sxx == 0.0) throw Error(Errc::InvalidParameter, "fit window has no time extent");
  const double slope = sxy / sxx;
  DecayFit f;
  f.rate = -slope;
  // log-values equal up to rounding count as a perfect (flat) fit
  const double flat = 64.0 * static_cast<double>(x.size()) * std::pow(1e-16 * std::max(1.0, std::abs(ym)), 2);
  f.r2 = syy <= flat ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  f.t_start = t_start;
  f.t_end = t_end;
  f.samples = x.size();
  return f;
}

}  // namespace kuramoto
