#pragma once

// Empirical measures on the cylinder, Wasserstein-2 distances, initial-data
// samplers and the particle experiments for the kinetic equation.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kuramoto/integrator.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/sync_analysis.hpp"

namespace kuramoto {

/// Equal-weight atoms (theta in [0, 2pi), omega).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<double> theta, std::vector<double> omega);
  static EmpiricalMeasure from_state(const OscillatorEnsemble& s);

  std::size_t size() const noexcept { return theta_.size(); }
  const std::vector<double>& theta() const noexcept { return theta_; }
  const std::vector<double>& omega() const noexcept { return omega_; }

 private:
  std::vector<double> theta_;
  std::vector<double> omega_;
};

/// Phases uniform on [center - halfwidth, center + halfwidth]; omega uniform on
/// [omega_value - omega_halfwidth, omega_value + omega_halfwidth].
struct ArcUniform {
  double center = 0.0;
  double halfwidth = 0.5;
  double omega_value = 0.0;
  double omega_halfwidth = 0.0;
};

/// Von Mises phases times a Gaussian in omega truncated to |omega| <= cutoff.
struct VonMisesGaussian {
  double mu = 0.0;
  double concentration = 1.0;
  double omega_sigma = 0.1;
  double omega_cutoff = 0.5;
};

/// round(c1 N) atoms at phi_star, the rest at phi_star + pi, all at rest.
struct TwoPole {
  double c1 = 1.0;
  double phi_star = 0.0;
};

/// theta_j = offset + span * j / N, omega = 0. span = 2pi gives the splay state.
struct Splay {
  double offset = 0.0;
  double span = 6.283185307179586;
};

using InitialDistribution = std::variant<ArcUniform, VonMisesGaussian, TwoPole, Splay>;

std::string distribution_name(const InitialDistribution& d);
void validate(const InitialDistribution& d);

/// Atoms are drawn one after another from a single stream, so the first n atoms
/// of a larger sample with the same seed form the n-atom sample.
OscillatorEnsemble sample_initial(const InitialDistribution& dist, std::size_t n, std::uint64_t seed);

struct W2Options {
  std::size_t exact_cap = 512;
  std::size_t projections = 256;
  std::uint64_t seed = 0x5eed;
};

struct W2Result {
  double value = 0.0;
  bool exact = true;
  double stderr_sq = 0.0;  // Monte Carlo standard error of the squared sliced estimate
};

/// Squared ground cost: geodesic circle distance squared plus (omega difference)^2.
double ground_cost(double theta_a, double omega_a, double theta_b, double omega_b) noexcept;

/// Exact W2 by assignment for equal sizes up to exact_cap; otherwise the sliced
/// estimate on the (cos theta, sin theta, omega) lift, which never exceeds the exact value.
W2Result wasserstein2_detailed(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                               const W2Options& opt = {});
double wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const W2Options& opt = {});

/// Sliced estimate regardless of sizes.
W2Result sliced_wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                             const W2Options& opt = {});

struct EpsilonEnergyReport {
  double value = 0.0;
  double epsilon = 0.0;
  double xx = 0.0;  // |X|^2
  double vv = 0.0;  // |V|^2
  double xv = 0.0;  // <X, V>
  double C0 = 0.0;  // smallest eigenvalue of [[eps gamma, m eps], [m eps, m]]
  double C1 = 0.0;  // largest eigenvalue
};

/// E_eps = eps gamma |X|^2 + 2 m eps <X, V> + m |V|^2
EpsilonEnergyReport epsilon_energy(std::span<const double> X, std::span<const double> V,
                                   double epsilon, double m, double gamma);

/// Scalar parameters of the homogeneous kinetic setting.
struct HomogeneousSpec {
  double m = 1.0;
  double gamma = 1.0;
  double kappa = 1.0;

  ModelParams params(std::size_t n) const { return ModelParams::homogeneous(n, m, gamma, kappa); }
};

struct StabilityConfig {
  IntegratorConfig integrator{1e-3, 50.0, 1, Scheme::RK4};
  std::optional<double> epsilon;
  double fit_t_start = 1.0;
  double fit_t_end = 50.0;
};

struct StabilityReport {
  bool hypothesis_failed = false;
  std::vector<std::string> hypothesis_notes;
  double C1_sum = 0.0;          // C1(0) + C1~(0)
  double gamma_tilde = 0.0;     // sin(2S)/S
  double gamma_tilde_alt = 0.0; // sin(S)/S
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  double epsilon = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  std::vector<double> times;
  std::vector<double> energy;   // E_eps at each sample
  bool monotone = true;         // E_eps non-increasing within 1e-9
  double max_increase = 0.0;
  double gap_decay_max = 0.0;      // max over steps of dE + C2 |(X,V)|^2 dt
  bool gap_decay_ok = true;        // gap_decay_max <= 1e-6
  double trapping_max = 0.0;    // max_t D(Theta) + D(Theta~)
  bool trapping_ok = true;
  std::optional<DecayFit> decay;
};

/// Co-simulates two centered homogeneous ensembles and tracks E_eps of their gap.
StabilityReport stability_experiment(const OscillatorEnsemble& init_a, const OscillatorEnsemble& init_b,
                                     const HomogeneousSpec& spec, const StabilityConfig& config);

struct ConvergenceConfig {
  IntegratorConfig integrator{1e-3, 50.0, 1, Scheme::RK4};
  double sample_interval = 1.0;
  std::vector<std::size_t> n_list;
  std::size_t n_ref = 0;
  std::vector<std::uint64_t> seeds;
  W2Options w2;
  std::size_t workers = 1;
};

struct ConvergenceRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double sup_w2 = 0.0;
  double initial_w2 = 0.0;
  bool exact = true;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<std::pair<std::size_t, double>> medians;  // per N, in n_list order
  bool medians_decreasing = false;
  double C1_ref = 0.0;                 // C1 of the first reference ensemble
  double m_kappa = 0.0;
  double bound_printed = 0.0;          // sin(4 C1) / (2 C1)
  double bound_alt = 0.0;              // sin(2 C1) / (2 C1)
  bool hypothesis_failed = false;
};

ConvergenceReport meanfield_convergence_experiment(const InitialDistribution& dist,
                                                   const HomogeneousSpec& spec,
                                                   const ConvergenceConfig& config);

/// Means of the kinetic solution: omega decays like e^{-gamma t/m} and theta
/// absorbs (m/gamma)(1 - e^{-gamma t/m}) times the initial mean frequency.
std::pair<double, double> propagation_of_averages(double mean_theta, double mean_omega, double m,
                                                  double gamma, double t);

/// max{omega_max, m kappa}
double support_bound(double omega_max, double m, double kappa);

struct KineticSyncConfig {
  IntegratorConfig integrator{1e-2, 500.0, 100, Scheme::RK4};
  std::uint64_t seed = 0;
  double tol_angle = 1e-3;
};

struct KineticSyncReport {
  bool condition = false;          // (m/N) sum omega^2 <= kappa R^2
  double condition_lhs = 0.0;
  double condition_rhs = 0.0;
  double R0 = 0.0;
  std::vector<double> times;
  std::vector<double> kinetic;     // E_K samples
  std::vector<double> order;       // R_p samples
  double max_energy_residual = 0.0;// per-sample |dE + (gamma/m)(E_K + E_K') dt| relative
  double final_kinetic = 0.0;
  LockClassification classification;
  double c1 = 0.0;
  double c2 = 0.0;
};

KineticSyncReport kinetic_sync_experiment(const InitialDistribution& dist, std::size_t n,
                                          const HomogeneousSpec& spec, const KineticSyncConfig& config);

}  // namespace kuramoto
