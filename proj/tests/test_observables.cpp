#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kuramoto/error.hpp"
#include "kuramoto/integrator.hpp"
#include "kuramoto/observables.hpp"
#include "test_util.hpp"

using namespace kuramoto;
using std::numbers::pi;

TEST_CASE("global order parameter") {
  auto g = global_order(std::vector<double>(5, 0.8));
  CHECK(g.R == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.phi == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_FALSE(g.degenerate);

  for (std::size_t n : {2u, 3u, 8u, 13u}) {
    g = global_order(testutil::splay(n));
    CHECK(g.R <= 1e-12);
    CHECK(g.degenerate);
    CHECK(g.phi == 0.0);
  }
  g = global_order(std::vector<double>{0.0, pi / 2});
  CHECK(g.R == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
  CHECK(g.phi == doctest::Approx(pi / 4).epsilon(1e-15));
  CHECK_THROWS_AS(global_order(std::vector<double>{}), Error);
}

TEST_CASE("local order parameter") {
  std::mt19937_64 rng(31);
  const auto th = testutil::uniform_vec(rng, 6, -pi, pi);
  const auto g = global_order(th);
  const auto lo = local_order(th, CapacityMatrix::all_to_all(6));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(lo.R[i] == doctest::Approx(g.R).epsilon(1e-14));
    CHECK(lo.phi[i] == doctest::Approx(g.phi).epsilon(1e-14));
  }
  const auto A = testutil::random_capacity(rng, 5);
  const auto same = local_order(std::vector<double>(5, 0.3), A);
  for (std::size_t i = 0; i < 5; ++i) CHECK(same.R[i] == doctest::Approx(A.row_sum(i)).epsilon(1e-14));

  for (int rep = 0; rep < 20; ++rep) {
    const auto t5 = testutil::uniform_vec(rng, 5, -pi, pi);
    const auto A5 = testutil::random_capacity(rng, 5);
    const auto l5 = local_order(t5, A5);
    for (std::size_t i = 0; i < 5; ++i) {
      double cs = 0.0;
      double sn = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        cs += A5(i, j) * std::cos(t5[j] - t5[i]);
        sn += A5(i, j) * std::sin(t5[j] - t5[i]);
      }
      CHECK(std::abs(l5.R[i] * std::cos(l5.phi[i] - t5[i]) - cs) <= 1e-12);
      CHECK(std::abs(l5.R[i] * std::sin(l5.phi[i] - t5[i]) - sn) <= 1e-12);
      CHECK(l5.R[i] <= A5.row_sum(i) + 1e-15);
    }
  }
  CHECK_THROWS_AS(local_order(th, CapacityMatrix::all_to_all(3)), Error);
}

TEST_CASE("order parameter identities on random inputs") {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 15;
    const auto th = testutil::uniform_vec(rng, n, -pi, pi);
    const auto g = global_order(th);
    if (g.R > 1e-8) {
      double s = 0.0;
      for (double t : th) s += std::sin(t - g.phi);
      CHECK(std::abs(s) <= 1e-10);
    }
    const auto [lhs, rhs] = cosine_sum_identity(th);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    CHECK(std::abs(rhs - std::pow(double(n) * g.R, 2)) <= 1e-10 * std::max(1.0, rhs));
  }
  auto [a, b] = cosine_sum_identity(std::vector<double>(4, 1.0));
  CHECK(a == doctest::Approx(16.0));
  CHECK(b == doctest::Approx(16.0));
  std::tie(a, b) = cosine_sum_identity(testutil::splay(6));
  CHECK(std::abs(a) <= 1e-10);
  CHECK(std::abs(b) <= 1e-10);
}

TEST_CASE("energies") {
  auto p = ModelParams::homogeneous(2, 2.0, 1.0, 1.0);
  auto e = energies({{0.0, 0.0}, {0.0, 0.0}}, p);
  CHECK(e.E_K == 0.0);
  CHECK(e.E_P == 0.0);
  e = energies({{0.5, 0.5}, {1.0, -1.0}}, p);
  CHECK(e.E_K == 2.0);
  CHECK(e.E_P == 0.0);
  CHECK(e.E == 2.0);
  CHECK(e.variant == EnergyVariant::Homogeneous);

  const auto p4 = ModelParams::homogeneous(4, 1.0, 1.0, 1.0);
  const OscillatorEnsemble sp{testutil::splay(4), std::vector<double>(4, 0.0)};
  e = energies(sp, p4);
  CHECK(e.E_P == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(potential_energy_order_form(sp.theta, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 15;
    const auto ph = ModelParams::homogeneous(n, 0.9, 1.0, 1.7);
    const OscillatorEnsemble s{testutil::uniform_vec(rng, n, -pi, pi), testutil::uniform_vec(rng, n, -1, 1)};
    const auto eh = energies(s, ph);
    double dbl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) dbl += 1.0 - std::cos(s.theta[j] - s.theta[i]);
    dbl *= 1.7 / (2.0 * double(n));
    CHECK(std::abs(eh.E_P - dbl) <= 1e-10 * std::max(1.0, dbl));
    CHECK(std::abs(eh.E_P - potential_energy_order_form(s.theta, 1.7)) <= 1e-10 * std::max(1.0, dbl));
    CHECK(eh.E_P <= 1.7 * double(n) / 2.0 + 1e-12);
    // heterogeneous form coincides for all-to-all parameters
    const auto et = energies(s, ph, EnergyVariant::Heterogeneous);
    CHECK(et.E_P == doctest::Approx(eh.E_P).epsilon(1e-12));
    CHECK(et.E_K == doctest::Approx(eh.E_K).epsilon(1e-12));
  }

  const auto ph = testutil::random_params(rng, 4);
  CHECK(energies({{0, 1, 2, 3}, {0, 0, 0, 0}}, ph).variant == EnergyVariant::Heterogeneous);
  CHECK_THROWS_AS(energies({{0, 1, 2, 3}, {0, 0, 0, 0}}, ph, EnergyVariant::Homogeneous), Error);
}

TEST_CASE("diameters") {
  const auto p = ModelParams::homogeneous(2, 1.0, 1.0, 1.0);
  auto d = diameters({{0.0, 1.0}, {2.0, 0.0}}, p);
  CHECK(d.D_theta == 1.0);
  CHECK(d.D_dot == -2.0);
  CHECK(d.C1 == 1.0);
  CHECK(d.C2 == 1.0);
  CHECK(d.D_omega == 2.0);
  CHECK_FALSE(d.max_tied);

  d = diameters({{0.4, 0.4}, {0.0, 0.5}}, p);
  CHECK(d.D_theta == 0.0);
  CHECK(d.max_tied);
  // ties resolve to index 0 on both ends, so D_dot = 0
  CHECK(d.C1 == 0.0);

  d = diameters({{0.0, 1.0}, {0.0, 0.5}}, ModelParams::homogeneous(2, 0.5, 1.0, 1.0));
  CHECK(d.C1 == doctest::Approx(1.25));
  CHECK(d.C2 == doctest::Approx(1.5));

  std::mt19937_64 rng(34);
  const OscillatorEnsemble s{testutil::uniform_vec(rng, 7, -2, 2), testutil::uniform_vec(rng, 7, -1, 1)};
  OscillatorEnsemble t = s;
  for (double& x : t.theta) x += 0.625;
  const auto p7 = ModelParams::homogeneous(7, 1.0, 1.0, 1.0);
  CHECK(diameters(s, p7).D_theta == doctest::Approx(diameters(t, p7).D_theta).epsilon(1e-15));
  CHECK(diameters(s, p7).C1 >= diameters(s, p7).D_theta);

  const ModelParams pn({1, 1, 1}, {1, 1, 1}, {0.5, -0.25, 0.0}, 1.0, CapacityMatrix::all_to_all(3));
  CHECK(diameters({{0, 0, 0}, {0, 0, 0}}, pn).D_nu == 0.75);
}

TEST_CASE("frequency functional") {
  const auto p = ModelParams::homogeneous(4, 1.0, 1.0, 1.0);
  const OscillatorEnsemble eq{testutil::splay(4), std::vector<double>(4, 0.0)};
  CHECK(freq_functional(eq, p) <= 1e-30);
  CHECK(freq_functional_order_form(eq, p) <= 1e-30);

  const ModelParams single({1.0}, {0.6}, {0.0}, 0.0, CapacityMatrix::all_to_all(1));
  CHECK(freq_functional({{0.0}, {2.0}}, single) == doctest::Approx(0.5 * 0.36 * 4.0).epsilon(1e-15));

  std::mt19937_64 rng(35);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 10;
    const auto pr = rep % 2 ? testutil::random_params(rng, n) : ModelParams::homogeneous(n, 0.5, 1.0, 2.0);
    const OscillatorEnsemble s{testutil::uniform_vec(rng, n, -pi, pi), testutil::uniform_vec(rng, n, -1, 1)};
    const double f = freq_functional(s, pr);
    CHECK(f >= 0.0);
    CHECK(std::abs(freq_functional_order_form(s, pr) - f) <= 1e-12 * std::max(1.0, f));
    CHECK(std::abs(freq_functional_accel(s, pr) - f) <= 1e-12 * std::max(1.0, f));
  }
}

TEST_CASE("weighted averages") {
  const auto p = ModelParams::homogeneous(3, 1.0, 1.0, 1.0);
  auto w = weighted_averages({{1.0, 2.0, 6.0}, {0.0, 0.0, 0.0}}, p);
  CHECK(w.theta_s == 3.0);
  CHECK(w.omega_s == 0.0);

  // nu = 0 network run: omega_s + theta_s is conserved
  std::mt19937_64 rng(36);
  auto pr = testutil::random_params(rng, 3);
  const ModelParams q(pr.masses(), pr.frictions(), {0.0, 0.0, 0.0}, 1.0, pr.capacity());
  const OscillatorEnsemble s{testutil::uniform_vec(rng, 3, -1, 1), testutil::uniform_vec(rng, 3, -1, 1)};
  w = weighted_averages(s, q);
  const double c0 = w.theta_s + w.omega_s;
  simulate(s, q, {1e-3, 10.0, 1, Scheme::RK4}, [&](double, const OscillatorEnsemble& x) {
    const auto wx = weighted_averages(x, q);
    CHECK(std::abs(wx.theta_s + wx.omega_s - c0) <= 1e-6);
  });
}

TEST_CASE("energy dissipation along trajectories") {
  std::mt19937_64 rng(37);
  const double m = 0.5;
  const double gamma = 1.0;
  const auto p = ModelParams::homogeneous(10, m, gamma, 1.5);
  const OscillatorEnsemble s{testutil::uniform_vec(rng, 10, -1.5, 1.5), testutil::uniform_vec(rng, 10, -1, 1)};
  const double dt = 1e-3;
  EnergyReport prev = energies(s, p);
  const double scale = std::max(1.0, prev.E);
  bool first = true;
  simulate(s, p, {dt, 20.0, 1, Scheme::RK4}, [&](double, const OscillatorEnsemble& x) {
    const auto e = energies(x, p);
    if (!first) {
      const double balance = e.E - prev.E + (gamma / m) * (e.E_K + prev.E_K) * dt;
      CHECK(std::abs(balance) <= 1e-6 * scale);
    }
    first = false;
    prev = e;
  });

  const auto ph = testutil::random_params(rng, 6);
  const OscillatorEnsemble sh{testutil::uniform_vec(rng, 6, -1.5, 1.5), testutil::uniform_vec(rng, 6, -1, 1)};
  const ModelParams q(ph.masses(), ph.frictions(), std::vector<double>(6, 0.0), ph.kappa(), ph.capacity());
  auto last = sh;
  auto prev_e = energies(sh, q);
  first = true;
  simulate(sh, q, {dt, 20.0, 1, Scheme::RK4}, [&](double, const OscillatorEnsemble& x) {
    const auto e = energies(x, q);
    if (!first) {
      double diss = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        diss += q.frictions()[i] * (x.omega[i] * x.omega[i] + last.omega[i] * last.omega[i]);
      }
      CHECK(std::abs(e.E - prev_e.E + 0.5 * diss * dt) <= 1e-6 * std::max(1.0, prev_e.E));
    }
    first = false;
    prev_e = e;
    last = x;
  });
}
