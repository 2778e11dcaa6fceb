#include "kuramoto/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "kuramoto/error.hpp"

namespace kuramoto {

const char* to_string(Scheme s) noexcept {
  return s == Scheme::RK4 ? "rk4" : "semi_implicit_euler";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "rk4" || name == "RK4") return Scheme::RK4;
  if (name == "semi_implicit_euler" || name == "SemiImplicitEuler") return Scheme::SemiImplicitEuler;
  throw Error(Errc::InvalidParameter, "unknown integration scheme '" + name + "'");
}

void IntegratorConfig::validate() const {
  if (!std::isfinite(dt) || dt <= 0.0) throw Error(Errc::InvalidParameter, "dt must be a positive number");
  if (!std::isfinite(t_final) || t_final < 0.0) {
    throw Error(Errc::InvalidParameter, "t_final must be a nonnegative number");
  }
  if (sample_every < 1) throw Error(Errc::InvalidParameter, "sample_every must be >= 1");
}

StepSchedule make_schedule(double dt, double t_final) {
  StepSchedule s;
  const double ratio = t_final / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9) {
    s.full_steps = static_cast<std::size_t>(nearest);
    return s;
  }
  s.full_steps = static_cast<std::size_t>(std::floor(ratio));
  s.tail = t_final - static_cast<double>(s.full_steps) * dt;
  if (s.tail <= 0.0) s.tail = 0.0;
  return s;
}

double StepSchedule::time_after(std::size_t k, double dt, double t_final) const noexcept {
  if (k >= total()) return t_final;
  return static_cast<double>(k) * dt;
}

namespace {

// Reusable buffers so long runs do not allocate per step.
class Stepper {
 public:
  explicit Stepper(const ModelParams& params) : p_(params) {
    const std::size_t n = params.size();
    for (auto* v : {&k1t_, &k1w_, &k2t_, &k2w_, &k3t_, &k3w_, &k4t_, &k4w_, &tmpt_, &tmpw_}) {
      v->resize(n);
    }
  }

  void advance(std::vector<double>& theta, std::vector<double>& omega, double dt, Scheme scheme) {
    if (scheme == Scheme::RK4) {
      rk4(theta, omega, dt);
    } else {
      semi_implicit(theta, omega, dt);
    }
  }

 private:
  void rk4(std::vector<double>& theta, std::vector<double>& omega, double dt) {
    const std::size_t n = theta.size();
    rhs_into(theta, omega, p_, k1t_, k1w_);
    for (std::size_t i = 0; i < n; ++i) {
      tmpt_[i] = theta[i] + 0.5 * dt * k1t_[i];
      tmpw_[i] = omega[i] + 0.5 * dt * k1w_[i];
    }
    rhs_into(tmpt_, tmpw_, p_, k2t_, k2w_);
    for (std::size_t i = 0; i < n; ++i) {
      tmpt_[i] = theta[i] + 0.5 * dt * k2t_[i];
      tmpw_[i] = omega[i] + 0.5 * dt * k2w_[i];
    }
    rhs_into(tmpt_, tmpw_, p_, k3t_, k3w_);
    for (std::size_t i = 0; i < n; ++i) {
      tmpt_[i] = theta[i] + dt * k3t_[i];
      tmpw_[i] = omega[i] + dt * k3w_[i];
    }
    rhs_into(tmpt_, tmpw_, p_, k4t_, k4w_);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] += w * (k1t_[i] + 2.0 * k2t_[i] + 2.0 * k3t_[i] + k4t_[i]);
      omega[i] += w * (k1w_[i] + 2.0 * k2w_[i] + 2.0 * k3w_[i] + k4w_[i]);
    }
  }

  // Friction treated implicitly, coupling explicitly; then the phase uses the new frequency.
  void semi_implicit(std::vector<double>& theta, std::vector<double>& omega, double dt) {
    coupling_into(theta, p_, k1w_);
    const auto& m = p_.masses();
    const auto& g = p_.frictions();
    const auto& nu = p_.natural_freqs();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      omega[i] = (m[i] * omega[i] + dt * (nu[i] + k1w_[i])) / (m[i] + g[i] * dt);
      theta[i] += dt * omega[i];
    }
  }

  const ModelParams& p_;
  std::vector<double> k1t_, k1w_, k2t_, k2w_, k3t_, k3w_, k4t_, k4w_, tmpt_, tmpw_;
};

void require_finite_step(const OscillatorEnsemble& s, std::size_t k, double t) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s.theta[i]) || !std::isfinite(s.omega[i])) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "nonfinite state at step %zu (t=%.17g), oscillator %zu", k, t, i);
      throw Error(Errc::StepFailure, buf);
    }
  }
}

template <class Visit>
OscillatorEnsemble run_steps(const OscillatorEnsemble& init, const ModelParams& params,
                             const IntegratorConfig& config, Visit&& visit) {
  config.validate();
  check_dimensions(init, params);
  const StepSchedule sched = make_schedule(config.dt, config.t_final);
  const std::size_t total = sched.total();

  OscillatorEnsemble s = init;
  Stepper stepper(params);
  visit(std::size_t{0}, 0.0, s, total == 0);
  for (std::size_t k = 1; k <= total; ++k) {
    const double h = k <= sched.full_steps ? config.dt : sched.tail;
    stepper.advance(s.theta, s.omega, h, config.scheme);
    const double t = sched.time_after(k, config.dt, config.t_final);
    require_finite_step(s, k, t);
    visit(k, t, s, k == total);
  }
  return s;
}

}  // namespace

OscillatorEnsemble step(const OscillatorEnsemble& state, const ModelParams& params, double dt,
                        Scheme scheme) {
  if (!std::isfinite(dt) || dt <= 0.0) throw Error(Errc::InvalidParameter, "dt must be a positive number");
  check_dimensions(state, params);
  OscillatorEnsemble out = state;
  Stepper stepper(params);
  stepper.advance(out.theta, out.omega, dt, scheme);
  require_finite_step(out, 1, dt);
  return out;
}

Trajectory simulate(const OscillatorEnsemble& init, const ModelParams& params,
                    const IntegratorConfig& config) {
  Trajectory traj{{}, {}, params};
  run_steps(init, params, config,
            [&](std::size_t k, double t, const OscillatorEnsemble& s, bool last) {
              if (k % config.sample_every == 0 || last) {
                traj.times.push_back(t);
                traj.states.push_back(s);
              }
            });
  return traj;
}

OscillatorEnsemble simulate(const OscillatorEnsemble& init, const ModelParams& params,
                            const IntegratorConfig& config, const StepObserver& observer) {
  return run_steps(init, params, config,
                   [&](std::size_t, double t, const OscillatorEnsemble& s, bool) { observer(t, s); });
}

MeanState mean_closed_form(double t, double theta_c0, double omega_c0, double m, double gamma,
                           double nu_c) {
  if (!(m > 0.0) || !(gamma > 0.0)) {
    throw Error(Errc::InvalidParameter, "mean_closed_form needs m > 0 and gamma > 0");
  }
  const double drift = nu_c / gamma;
  const double excess = omega_c0 - drift;
  const double decay = std::exp(-gamma * t / m);
  // -expm1 keeps 1 - e^{-x} accurate for small x
  return {theta_c0 + t * drift + (m / gamma) * excess * -std::expm1(-gamma * t / m),
          drift + excess * decay};
}

}  // namespace kuramoto
