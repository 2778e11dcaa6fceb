#pragma once

// State, parameters and right-hand side of the inertial Kuramoto system
//
//   theta_i' = omega_i
//   m_i omega_i' = -gamma_i omega_i + nu_i + kappa * sum_j a_ij sin(theta_j - theta_i)
//
// Phases are kept on the real line (never wrapped); observables that need a
// point on the circle wrap internally.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace kuramoto {

struct OscillatorEnsemble {
  std::vector<double> theta;
  std::vector<double> omega;

  std::size_t size() const noexcept { return theta.size(); }

  // Throws Error{DimensionMismatch} or Error{NonFinite}.
  void validate() const;

  bool operator==(const OscillatorEnsemble&) const = default;
};

struct StateDerivative {
  std::vector<double> dtheta;
  std::vector<double> domega;
};

/// Symmetric, entrywise nonnegative N x N network weights, stored row-major.
class CapacityMatrix {
 public:
  CapacityMatrix() = default;
  CapacityMatrix(std::size_t n, std::vector<double> entries);

  /// a_ij = 1/N for every pair, diagonal included.
  static CapacityMatrix all_to_all(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {a_.data() + i * n_, n_}; }
  std::span<const double> entries() const noexcept { return a_; }

  double row_sum(std::size_t i) const noexcept;
  double max_entry() const noexcept;

  /// Set when every entry holds the same value (e.g. all-to-all coupling).
  std::optional<double> uniform_value() const noexcept { return uniform_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
  std::optional<double> uniform_;
};

enum class ModelVariant { HomogeneousAllToAll, HeterogeneousNetwork };

const char* to_string(ModelVariant v) noexcept;

class ModelParams {
 public:
  ModelParams(std::vector<double> masses, std::vector<double> frictions,
              std::vector<double> natural_freqs, double kappa, CapacityMatrix capacity);

  /// Equal inertia, friction and natural frequency with all-to-all coupling.
  static ModelParams homogeneous(std::size_t n, double mass, double friction, double kappa,
                                 double natural_freq = 0.0);

  std::size_t size() const noexcept { return masses_.size(); }
  const std::vector<double>& masses() const noexcept { return masses_; }
  const std::vector<double>& frictions() const noexcept { return frictions_; }
  const std::vector<double>& natural_freqs() const noexcept { return natural_freqs_; }
  double kappa() const noexcept { return kappa_; }
  const CapacityMatrix& capacity() const noexcept { return capacity_; }

  ModelVariant variant() const noexcept { return variant_; }
  /// Equal masses and equal frictions (the network may be arbitrary).
  bool uniform_inertia() const noexcept { return uniform_inertia_; }
  bool all_to_all() const noexcept;

  double mean_natural_freq() const noexcept;

  ModelParams with_kappa(double kappa) const;

 private:
  std::vector<double> masses_;
  std::vector<double> frictions_;
  std::vector<double> natural_freqs_;
  double kappa_ = 0.0;
  CapacityMatrix capacity_;
  ModelVariant variant_ = ModelVariant::HeterogeneousNetwork;
  bool uniform_inertia_ = false;
};

/// kappa * sum_j a_ij sin(theta_j - theta_i) for every i, written into `out`.
/// No validation; callers guarantee matching sizes.
void coupling_into(std::span<const double> theta, const ModelParams& params,
                   std::span<double> out);

/// Unchecked right-hand side for the integrator's inner loop.
void rhs_into(std::span<const double> theta, std::span<const double> omega,
              const ModelParams& params, std::span<double> dtheta, std::span<double> domega);

StateDerivative rhs(const OscillatorEnsemble& state, const ModelParams& params);

/// r_i = nu_i + kappa * sum_j a_ij sin(theta_j - theta_i); zero at equilibria.
std::vector<double> equilibrium_residual(std::span<const double> theta, const ModelParams& params);

/// sum_ij (1 - cos(theta_i - theta_j)) in O(N), accurate near phase coherence.
double pairwise_dissonance(std::span<const double> theta);

/// sum_ij a_ij (1 - cos(theta_i - theta_j))
double interaction_sum(std::span<const double> theta, const CapacityMatrix& a);

/// V(theta) = -sum_j nu_j theta_j + (kappa/2) sum_ij a_ij (1 - cos(theta_i - theta_j))
double potential(std::span<const double> theta, const ModelParams& params);

/// Gradient of `potential`; always the exact negation of `equilibrium_residual`.
std::vector<double> grad_potential(std::span<const double> theta, const ModelParams& params);

/// Subtracts the phase and frequency means so that theta_c = omega_c = 0.
/// Requires equal masses and frictions (closed-form mean dynamics).
OscillatorEnsemble comoving_shift(const OscillatorEnsemble& state, const ModelParams& params);

void check_dimensions(const OscillatorEnsemble& state, const ModelParams& params);
void check_dimensions(std::span<const double> theta, const ModelParams& params);

}  // namespace kuramoto
