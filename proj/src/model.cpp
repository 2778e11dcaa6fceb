#include "kuramoto/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kuramoto/error.hpp"

namespace kuramoto {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(Errc::NonFinite, std::string(what) + "[" + std::to_string(i) + "]");
    }
  }
}

bool all_equal(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

double half_angle_sin_sq(double x) {
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s;  // == 1 - cos(x) without cancellation
}

}  // namespace

void OscillatorEnsemble::validate() const {
  if (theta.size() != omega.size()) {
    throw Error(Errc::DimensionMismatch, "theta has " + std::to_string(theta.size()) +
                                             " entries, omega has " + std::to_string(omega.size()));
  }
  if (theta.empty()) throw Error(Errc::DimensionMismatch, "ensemble must hold at least one oscillator");
  require_finite(theta, "theta");
  require_finite(omega, "omega");
}

CapacityMatrix::CapacityMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), a_(std::move(entries)) {
  if (n_ == 0) throw Error(Errc::DimensionMismatch, "capacity matrix must be at least 1x1");
  if (a_.size() != n_ * n_) {
    throw Error(Errc::DimensionMismatch, "capacity matrix needs " + std::to_string(n_ * n_) +
                                             " entries, got " + std::to_string(a_.size()));
  }
  require_finite(a_, "capacity");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double aij = a_[i * n_ + j];
      if (aij < 0.0) {
        throw Error(Errc::InvalidParameter, "capacity a(" + std::to_string(i) + "," +
                                                std::to_string(j) + ") is negative");
      }
      if (j > i && aij != a_[j * n_ + i]) {
        throw Error(Errc::InvalidParameter, "capacity is not symmetric at (" + std::to_string(i) +
                                                "," + std::to_string(j) + ")");
      }
    }
  }
  if (all_equal(a_)) uniform_ = a_.front();
}

CapacityMatrix CapacityMatrix::all_to_all(std::size_t n) {
  if (n == 0) throw Error(Errc::DimensionMismatch, "capacity matrix must be at least 1x1");
  return CapacityMatrix(n, std::vector<double>(n * n, 1.0 / static_cast<double>(n)));
}

double CapacityMatrix::row_sum(std::size_t i) const noexcept {
  const auto r = row(i);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

double CapacityMatrix::max_entry() const noexcept {
  return a_.empty() ? 0.0 : *std::max_element(a_.begin(), a_.end());
}

const char* to_string(ModelVariant v) noexcept {
  return v == ModelVariant::HomogeneousAllToAll ? "homogeneous_all_to_all" : "heterogeneous_network";
}

ModelParams::ModelParams(std::vector<double> masses, std::vector<double> frictions,
                         std::vector<double> natural_freqs, double kappa, CapacityMatrix capacity)
    : masses_(std::move(masses)),
      frictions_(std::move(frictions)),
      natural_freqs_(std::move(natural_freqs)),
      kappa_(kappa),
      capacity_(std::move(capacity)) {
  const std::size_t n = masses_.size();
  if (n == 0) throw Error(Errc::DimensionMismatch, "model needs at least one oscillator");
  if (frictions_.size() != n || natural_freqs_.size() != n || capacity_.size() != n) {
    throw Error(Errc::DimensionMismatch, "masses, frictions, natural frequencies and capacity "
                                         "must all describe the same N");
  }
  require_finite(masses_, "mass");
  require_finite(frictions_, "friction");
  require_finite(natural_freqs_, "natural_freq");
  if (!std::isfinite(kappa_)) throw Error(Errc::NonFinite, "kappa");
  for (std::size_t i = 0; i < n; ++i) {
    if (masses_[i] <= 0.0) throw Error(Errc::InvalidParameter, "mass[" + std::to_string(i) + "] must be > 0");
    if (frictions_[i] <= 0.0) {
      throw Error(Errc::InvalidParameter, "friction[" + std::to_string(i) + "] must be > 0");
    }
  }
  if (kappa_ < 0.0) throw Error(Errc::InvalidParameter, "kappa must be >= 0");

  uniform_inertia_ = all_equal(masses_) && all_equal(frictions_);
  if (uniform_inertia_ && all_equal(natural_freqs_) && all_to_all()) {
    variant_ = ModelVariant::HomogeneousAllToAll;
  }
}

ModelParams ModelParams::homogeneous(std::size_t n, double mass, double friction, double kappa,
                                     double natural_freq) {
  return ModelParams(std::vector<double>(n, mass), std::vector<double>(n, friction),
                     std::vector<double>(n, natural_freq), kappa, CapacityMatrix::all_to_all(n));
}

bool ModelParams::all_to_all() const noexcept {
  const auto u = capacity_.uniform_value();
  return u && *u == 1.0 / static_cast<double>(size());
}

double ModelParams::mean_natural_freq() const noexcept {
  return std::accumulate(natural_freqs_.begin(), natural_freqs_.end(), 0.0) /
         static_cast<double>(size());
}

ModelParams ModelParams::with_kappa(double kappa) const {
  return ModelParams(masses_, frictions_, natural_freqs_, kappa, capacity_);
}

void check_dimensions(std::span<const double> theta, const ModelParams& params) {
  if (theta.size() != params.size()) {
    throw Error(Errc::DimensionMismatch, "state has " + std::to_string(theta.size()) +
                                             " oscillators, parameters describe " +
                                             std::to_string(params.size()));
  }
  require_finite(theta, "theta");
}

void check_dimensions(const OscillatorEnsemble& state, const ModelParams& params) {
  state.validate();
  check_dimensions(std::span<const double>(state.theta), params);
}

void coupling_into(std::span<const double> theta, const ModelParams& params, std::span<double> out) {
  const std::size_t n = theta.size();
  const double kappa = params.kappa();
  const CapacityMatrix& a = params.capacity();

  if (const auto u = a.uniform_value()) {
    // sum_j sin(theta_j - theta_i) = S cos(theta_i - psi) - C sin(theta_i - psi) with S, C the
    // sums of sin/cos(theta_j - psi). Measuring from psi = theta_0 keeps coherent states exact.
    const double psi = theta[0];
    double s_sum = 0.0;
    double c_sum = 0.0;
    thread_local std::vector<double> sines, cosines;
    sines.resize(n);
    cosines.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      sines[j] = std::sin(theta[j] - psi);
      cosines[j] = std::cos(theta[j] - psi);
      s_sum += sines[j];
      c_sum += cosines[j];
    }
    const double scale = kappa * *u;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = scale * (s_sum * cosines[i] - c_sum * sines[i]);
    }
    return;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] != 0.0) acc += row[j] * std::sin(theta[j] - theta[i]);
    }
    out[i] = kappa * acc;
  }
}

void rhs_into(std::span<const double> theta, std::span<const double> omega,
              const ModelParams& params, std::span<double> dtheta, std::span<double> domega) {
  coupling_into(theta, params, domega);
  const auto& m = params.masses();
  const auto& g = params.frictions();
  const auto& nu = params.natural_freqs();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    dtheta[i] = omega[i];
    domega[i] = (-g[i] * omega[i] + nu[i] + domega[i]) / m[i];
  }
}

StateDerivative rhs(const OscillatorEnsemble& state, const ModelParams& params) {
  check_dimensions(state, params);
  StateDerivative d{std::vector<double>(state.size()), std::vector<double>(state.size())};
  rhs_into(state.theta, state.omega, params, d.dtheta, d.domega);
  return d;
}

std::vector<double> equilibrium_residual(std::span<const double> theta, const ModelParams& params) {
  check_dimensions(theta, params);
  std::vector<double> r(theta.size());
  coupling_into(theta, params, r);
  const auto& nu = params.natural_freqs();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += nu[i];
  return r;
}

std::vector<double> grad_potential(std::span<const double> theta, const ModelParams& params) {
  auto g = equilibrium_residual(theta, params);
  for (double& x : g) x = -x;
  return g;
}

double pairwise_dissonance(std::span<const double> theta) {
  // sum_ij (1 - cos(theta_i - theta_j)) = N^2 - |sum_j e^{i(theta_j - psi)}|^2 for any psi.
  // Choosing psi = arg(sum e^{i theta}) and factoring N^2 - c^2 = (N - c)(N + c) keeps the
  // small difference N - c as a sum of nonnegative terms.
  const auto n = static_cast<double>(theta.size());
  double re = 0.0;
  double im = 0.0;
  for (double t : theta) {
    re += std::cos(t);
    im += std::sin(t);
  }
  const double psi = std::hypot(re, im) > 0.0 ? std::atan2(im, re) : 0.0;
  double gap = 0.0;
  double c = 0.0;
  double s = 0.0;
  for (double t : theta) {
    gap += half_angle_sin_sq(t - psi);
    c += std::cos(t - psi);
    s += std::sin(t - psi);
  }
  return std::max(0.0, gap * (n + c) - s * s);
}

double interaction_sum(std::span<const double> theta, const CapacityMatrix& a) {
  if (const auto u = a.uniform_value()) return *u * pairwise_dissonance(theta);
  double pair = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto row = a.row(i);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (row[j] != 0.0) pair += row[j] * half_angle_sin_sq(theta[i] - theta[j]);
    }
  }
  return pair;
}

double potential(std::span<const double> theta, const ModelParams& params) {
  check_dimensions(theta, params);
  const auto& nu = params.natural_freqs();
  double drift = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) drift -= nu[j] * theta[j];
  return drift + 0.5 * params.kappa() * interaction_sum(theta, params.capacity());
}

OscillatorEnsemble comoving_shift(const OscillatorEnsemble& state, const ModelParams& params) {
  check_dimensions(state, params);
  if (!params.uniform_inertia()) {
    throw Error(Errc::WrongVariant,
                "comoving shift needs equal masses and frictions for the closed-form mean");
  }
  const auto n = static_cast<double>(state.size());
  const double theta_c = std::accumulate(state.theta.begin(), state.theta.end(), 0.0) / n;
  const double omega_c = std::accumulate(state.omega.begin(), state.omega.end(), 0.0) / n;
  OscillatorEnsemble out = state;
  for (double& t : out.theta) t -= theta_c;
  for (double& w : out.omega) w -= omega_c;
  return out;
}

}  // namespace kuramoto
