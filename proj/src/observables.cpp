#include "kuramoto/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "kuramoto/error.hpp"

namespace kuramoto {

using std::numbers::pi;

double wrap_pi(double x) noexcept {
  double y = std::remainder(x, 2.0 * pi);
  if (y <= -pi) y += 2.0 * pi;
  return y;
}

double wrap_two_pi(double x) noexcept {
  double y = std::fmod(x, 2.0 * pi);
  if (y < 0.0) y += 2.0 * pi;
  if (y >= 2.0 * pi) y = 0.0;
  return y;
}

double mean(std::span<const double> v) noexcept {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

GlobalOrder global_order(std::span<const double> theta, double eps_R) {
  if (theta.empty()) throw Error(Errc::DimensionMismatch, "order parameter of an empty ensemble");
  double re = 0.0;
  double im = 0.0;
  for (double t : theta) {
    re += std::cos(t);
    im += std::sin(t);
  }
  const auto n = static_cast<double>(theta.size());
  GlobalOrder g;
  g.R = std::min(1.0, std::hypot(re, im) / n);
  if (g.R < eps_R) {
    g.degenerate = true;
  } else {
    g.phi = std::atan2(im, re);
  }
  return g;
}

LocalOrder local_order(std::span<const double> theta, const CapacityMatrix& A, double eps_R) {
  const std::size_t n = theta.size();
  if (A.size() != n) {
    throw Error(Errc::DimensionMismatch, "capacity matrix does not match the number of phases");
  }
  std::vector<double> c(n), s(n);
  for (std::size_t j = 0; j < n; ++j) {
    c[j] = std::cos(theta[j]);
    s[j] = std::sin(theta[j]);
  }
  LocalOrder lo{std::vector<double>(n), std::vector<double>(n), std::vector<bool>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = A.row(i);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      re += row[j] * c[j];
      im += row[j] * s[j];
    }
    lo.R[i] = std::hypot(re, im);
    if (lo.R[i] < eps_R) {
      lo.degenerate[i] = true;
    } else {
      lo.phi[i] = std::atan2(im, re);
    }
  }
  return lo;
}

OrderParams order_params(std::span<const double> theta, const CapacityMatrix& A, double eps_R) {
  const GlobalOrder g = global_order(theta, eps_R);
  LocalOrder lo = local_order(theta, A, eps_R);
  return {g.R, g.phi, g.degenerate, std::move(lo.R), std::move(lo.phi), std::move(lo.degenerate)};
}

EnergyReport energies(const OscillatorEnsemble& state, const ModelParams& params) {
  return energies(state, params,
                  params.variant() == ModelVariant::HomogeneousAllToAll ? EnergyVariant::Homogeneous
                                                                        : EnergyVariant::Heterogeneous);
}

EnergyReport energies(const OscillatorEnsemble& state, const ModelParams& params,
                      EnergyVariant variant) {
  check_dimensions(state, params);
  EnergyReport r;
  r.variant = variant;
  const auto& m = params.masses();
  if (variant == EnergyVariant::Homogeneous) {
    if (params.variant() != ModelVariant::HomogeneousAllToAll) {
      throw Error(Errc::WrongVariant, "homogeneous energies need equal m, gamma, nu and a_ij = 1/N");
    }
    double sq = 0.0;
    for (double w : state.omega) sq += w * w;
    r.E_K = 0.5 * m[0] * sq;
    r.E_P = params.kappa() / (2.0 * static_cast<double>(state.size())) *
            pairwise_dissonance(state.theta);
  } else {
    for (std::size_t i = 0; i < state.size(); ++i) r.E_K += 0.5 * m[i] * state.omega[i] * state.omega[i];
    r.E_P = 0.5 * params.kappa() * interaction_sum(state.theta, params.capacity());
  }
  r.E = r.E_K + r.E_P;
  return r;
}

double potential_energy_order_form(std::span<const double> theta, double kappa) {
  const double R = global_order(theta, 0.0).R;
  return 0.5 * kappa * static_cast<double>(theta.size()) * (1.0 - R * R);
}

double spread(std::span<const double> v) noexcept {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

double c_ell(double D, double D_dot, double ell, double m) noexcept {
  return std::max(D, D + ell * m * D_dot);
}

DiameterReport diameters(const OscillatorEnsemble& state, const ModelParams& params) {
  check_dimensions(state, params);
  DiameterReport d;
  const auto& th = state.theta;
  std::size_t imax = 0;
  std::size_t imin = 0;
  for (std::size_t i = 1; i < th.size(); ++i) {
    if (th[i] > th[imax]) imax = i;
    if (th[i] < th[imin]) imin = i;
  }
  for (std::size_t i = 0; i < th.size(); ++i) {
    if ((i != imax && th[i] == th[imax]) || (i != imin && th[i] == th[imin])) d.max_tied = true;
  }
  d.D_theta = th[imax] - th[imin];
  d.D_omega = spread(state.omega);
  d.D_dot = state.omega[imax] - state.omega[imin];
  const double m = *std::max_element(params.masses().begin(), params.masses().end());
  d.C1 = c_ell(d.D_theta, d.D_dot, 1.0, m);
  d.C2 = c_ell(d.D_theta, d.D_dot, 2.0, m);
  d.D_nu = spread(params.natural_freqs());
  return d;
}

double freq_functional(const OscillatorEnsemble& state, const ModelParams& params) {
  check_dimensions(state, params);
  std::vector<double> coupling(state.size());
  coupling_into(state.theta, params, coupling);
  const auto& g = params.frictions();
  const auto& nu = params.natural_freqs();
  double f = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double r = g[i] * state.omega[i] - nu[i] - coupling[i];
    f += r * r;
  }
  return 0.5 * f;
}

double freq_functional_order_form(const OscillatorEnsemble& state, const ModelParams& params) {
  check_dimensions(state, params);
  const LocalOrder lo = local_order(state.theta, params.capacity());
  const auto& g = params.frictions();
  const auto& nu = params.natural_freqs();
  const double kappa = params.kappa();
  double f = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    double pull;
    if (lo.degenerate[i]) {
      const auto row = params.capacity().row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < state.size(); ++j) acc += row[j] * std::sin(state.theta[j] - state.theta[i]);
      pull = -kappa * acc;
    } else {
      pull = kappa * lo.R[i] * std::sin(state.theta[i] - lo.phi[i]);
    }
    const double r = g[i] * state.omega[i] - nu[i] + pull;
    f += r * r;
  }
  return 0.5 * f;
}

double freq_functional_accel(const OscillatorEnsemble& state, const ModelParams& params) {
  const StateDerivative d = rhs(state, params);
  const auto& m = params.masses();
  double f = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double a = m[i] * d.domega[i];
    f += a * a;
  }
  return 0.5 * f;
}

std::pair<double, double> cosine_sum_identity(std::span<const double> theta) {
  double lhs = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (std::size_t j = 0; j < theta.size(); ++j) lhs += std::cos(theta[i] - theta[j]);
  }
  double re = 0.0;
  double im = 0.0;
  for (double t : theta) {
    re += std::cos(t);
    im += std::sin(t);
  }
  return {lhs, re * re + im * im};
}

WeightedAverages weighted_averages(const OscillatorEnsemble& state, const ModelParams& params) {
  check_dimensions(state, params);
  WeightedAverages w;
  const auto& m = params.masses();
  const auto& g = params.frictions();
  for (std::size_t i = 0; i < state.size(); ++i) {
    w.theta_s += g[i] * state.theta[i];
    w.omega_s += m[i] * state.omega[i];
  }
  const auto n = static_cast<double>(state.size());
  w.theta_s /= n;
  w.omega_s /= n;
  return w;
}

}  // namespace kuramoto
