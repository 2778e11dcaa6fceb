#pragma once

// Order parameters, energies, diameters and the frequency functional.

#include <span>
#include <utility>
#include <vector>

#include "kuramoto/model.hpp"

namespace kuramoto {

/// Below this modulus an order parameter's phase is meaningless; it is reported as 0.
inline constexpr double kDegenerateOrder = 1e-8;

/// Maps to (-pi, pi].
double wrap_pi(double x) noexcept;
/// Maps to [0, 2pi).
double wrap_two_pi(double x) noexcept;

struct GlobalOrder {
  double R = 0.0;
  double phi = 0.0;
  bool degenerate = false;
};

struct LocalOrder {
  std::vector<double> R;
  std::vector<double> phi;
  std::vector<bool> degenerate;
};

struct OrderParams {
  double R_p = 0.0;
  double phi_p = 0.0;
  bool degenerate = false;
  std::vector<double> R_local;
  std::vector<double> phi_local;
  std::vector<bool> local_degenerate;
};

/// (1/N) sum_j e^{i theta_j}
GlobalOrder global_order(std::span<const double> theta, double eps_R = kDegenerateOrder);

/// sum_j a_ij e^{i theta_j} for each i
LocalOrder local_order(std::span<const double> theta, const CapacityMatrix& A,
                       double eps_R = kDegenerateOrder);

OrderParams order_params(std::span<const double> theta, const CapacityMatrix& A,
                         double eps_R = kDegenerateOrder);

enum class EnergyVariant { Homogeneous, Heterogeneous };

struct EnergyReport {
  double E_K = 0.0;
  double E_P = 0.0;
  double E = 0.0;
  EnergyVariant variant = EnergyVariant::Homogeneous;
};

/// Homogeneous energies for HomogeneousAllToAll parameters, tilde energies otherwise.
EnergyReport energies(const OscillatorEnsemble& state, const ModelParams& params);
EnergyReport energies(const OscillatorEnsemble& state, const ModelParams& params,
                      EnergyVariant variant);

/// (kappa N / 2)(1 - R_p^2); equals the homogeneous E_P.
double potential_energy_order_form(std::span<const double> theta, double kappa);

struct DiameterReport {
  double D_theta = 0.0;
  double D_omega = 0.0;
  double D_dot = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double D_nu = 0.0;
  bool max_tied = false;  // argmax or argmin phase is not unique
};

double spread(std::span<const double> v) noexcept;

/// max{D, D + ell * m * D_dot}
double c_ell(double D, double D_dot, double ell, double m) noexcept;

/// C_ell uses the largest mass (all masses coincide in the settings where C_ell matters).
DiameterReport diameters(const OscillatorEnsemble& state, const ModelParams& params);

/// F = 1/2 sum_i (gamma_i omega_i - nu_i - kappa sum_j a_ij sin(theta_j - theta_i))^2
double freq_functional(const OscillatorEnsemble& state, const ModelParams& params);

/// Same quantity written with local order parameters,
/// gamma_i omega_i - nu_i + kappa R_{p,i} sin(theta_i - phi_{p,i}).
double freq_functional_order_form(const OscillatorEnsemble& state, const ModelParams& params);

/// 1/2 sum_i (m_i omega_i')^2 with omega' taken from the right-hand side.
double freq_functional_accel(const OscillatorEnsemble& state, const ModelParams& params);

/// (sum_ij cos(theta_i - theta_j), (N R_p)^2)
std::pair<double, double> cosine_sum_identity(std::span<const double> theta);

struct WeightedAverages {
  double theta_s = 0.0;  // (1/N) sum gamma_i theta_i
  double omega_s = 0.0;  // (1/N) sum m_i omega_i
};

WeightedAverages weighted_averages(const OscillatorEnsemble& state, const ModelParams& params);

double mean(std::span<const double> v) noexcept;

}  // namespace kuramoto
