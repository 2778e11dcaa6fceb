#pragma once

// Fixed-step time integration of the first-order system.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "kuramoto/model.hpp"

namespace kuramoto {

enum class Scheme { RK4, SemiImplicitEuler };

const char* to_string(Scheme s) noexcept;
Scheme scheme_from_string(const std::string& name);

struct IntegratorConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t sample_every = 1;
  Scheme scheme = Scheme::RK4;

  void validate() const;
};

/// Step times t_k = k*dt plus, when t_final is not a multiple of dt, one
/// trailing short step landing exactly on t_final.
struct StepSchedule {
  std::size_t full_steps = 0;
  double tail = 0.0;  // 0 when no trailing step

  std::size_t total() const noexcept { return full_steps + (tail > 0.0 ? 1 : 0); }
  double time_after(std::size_t k, double dt, double t_final) const noexcept;
};

StepSchedule make_schedule(double dt, double t_final);

struct Trajectory {
  std::vector<double> times;
  std::vector<OscillatorEnsemble> states;
  ModelParams params;

  std::size_t size() const noexcept { return times.size(); }
};

OscillatorEnsemble step(const OscillatorEnsemble& state, const ModelParams& params, double dt,
                        Scheme scheme = Scheme::RK4);

Trajectory simulate(const OscillatorEnsemble& init, const ModelParams& params,
                    const IntegratorConfig& config);

/// Called with (t, state) after every step, starting with the initial state at t = 0.
using StepObserver = std::function<void(double, const OscillatorEnsemble&)>;

/// Same integration as `simulate` but streams every step to `observer` instead of
/// storing samples. Returns the state at t_final.
OscillatorEnsemble simulate(const OscillatorEnsemble& init, const ModelParams& params,
                            const IntegratorConfig& config, const StepObserver& observer);

struct MeanState {
  double theta_c;
  double omega_c;
};

/// Exact solution of m theta_c'' + gamma theta_c' = nu_c.
MeanState mean_closed_form(double t, double theta_c0, double omega_c0, double m, double gamma,
                           double nu_c);

}  // namespace kuramoto
