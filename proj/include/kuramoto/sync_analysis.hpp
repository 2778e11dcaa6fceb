#pragma once

// Sufficient-condition checks, lock classification, synchronization detection
// and small numerical utilities for decay rates and Gronwall-type envelopes.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kuramoto/integrator.hpp"
#include "kuramoto/model.hpp"

namespace kuramoto {

enum class TheoremId { T31, T32, T33, T34, T35 };

const char* to_string(TheoremId id) noexcept;

struct ConditionVerdict {
  TheoremId theorem = TheoremId::T34;
  bool satisfied = false;
  /// Computed quantities and the thresholds they are compared against.
  std::map<std::string, double> margins;
  /// Names of the individual inequalities that fail (empty when satisfied).
  std::vector<std::string> failed;
};

/// (m/N) sum omega_i^2 <= kappa R_p^2 at the initial state; homogeneous all-to-all, nu = 0.
ConditionVerdict check_theorem34(const OscillatorEnsemble& init, const ModelParams& params);

/// sqrt(R_p(0)^2 - 2 E_K(0)/(kappa N)), the order-parameter floor implied by energy
/// monotonicity. NaN when the radicand is negative.
double theorem34_order_floor(const OscillatorEnsemble& init, const ModelParams& params);

/// Off-diagonal mean of the capacity matrix (the single entry when N = 1).
double default_a_bar(const CapacityMatrix& A);

/// max_i sum_j |a_ij - a_bar|
double capacity_deviation(const CapacityMatrix& A, double a_bar);

/// sum a_ij cos(theta_i - theta_j) >= sum m_i omega_i^2 + 3 delta N + delta^2 / a_bar.
/// `a_bar` defaults to the off-diagonal mean of A.
ConditionVerdict check_theorem35(const OscillatorEnsemble& init, const ModelParams& params,
                                 std::optional<double> a_bar = std::nullopt);

/// Root of sin x = ratio on (0, pi/2] by bisection; ratio in (0, 1].
double sin_root(double ratio);

ConditionVerdict check_small_large_inertia(const OscillatorEnsemble& init, const ModelParams& params,
                                           TheoremId framework);

enum class LockKind { OnePointCluster, Bipolar, ZeroOrderParameter, Unclassified };

const char* to_string(LockKind k) noexcept;

struct LockClassification {
  LockKind kind = LockKind::Unclassified;
  std::size_t k = 0;        // oscillators at phi_star
  double phi_star = 0.0;    // in [0, 2pi)
  double residual = 0.0;    // max angular distance to {phi_star, phi_star + pi}
};

LockClassification classify_lock(std::span<const double> theta, double tol_angle);

/// Earliest sample time from which the frequency spread stays <= tol_freq up to the
/// last sample, provided that tail spans at least hold_time.
std::optional<double> detect_sync(const Trajectory& traj, double tol_freq, double hold_time = 10.0);
std::optional<double> detect_sync(std::span<const double> times, std::span<const double> freq_spread,
                                  double tol_freq, double hold_time = 10.0);

/// Lower bounds that follow from energy monotonicity for the network model,
/// evaluated for one normalization of J0.
struct BoundSet {
  double J0 = 0.0;
  double Rp_sq = 0.0;      // R_p^2 > (J0 - delta N) / (a_bar N^2)
  double Rpi = 0.0;        // R_{p,i} >= sqrt(a_bar (J0 - 3 delta N) - delta^2)
  double C0 = 0.0;
  double cos_bound = 0.0;  // cos(phi_{p,i} - phi_p) >= a_bar N / C0 - C0 delta / (a_bar (J0 - 3 delta N) - delta^2)
  bool valid = false;      // both order-parameter bounds are positive
};

struct HeteroBounds {
  double a_bar = 0.0;
  double delta = 0.0;
  BoundSet half_kappa;  // J0 = (kappa/2) sum a_ij cos - (1/2) sum m_i omega_i^2
  BoundSet unscaled;    // J0 = sum a_ij cos - sum m_i omega_i^2

  std::map<std::string, double> to_map() const;
};

/// Throws Error{InsufficientMargin} when neither convention yields positive bounds.
HeteroBounds hetero_lower_bounds(const OscillatorEnsemble& init, const ModelParams& params,
                                 double a_bar, double delta);

/// y0 e^{-alpha t} + (1/alpha) max_{[t/2, t]} |beta| + (sup|beta| / alpha) e^{-alpha t / 2}.
/// The window maximum includes the last grid point at or below t/2.
std::vector<double> gronwall_envelope(double y0, double alpha, std::span<const double> beta,
                                      std::span<const double> t_grid);

struct DecayFit {
  double rate = 0.0;
  double r2 = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of log(value) against t over samples with t in [t_start, t_end].
DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_start,
                   double t_end);

}  // namespace kuramoto
