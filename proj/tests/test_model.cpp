#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kuramoto/error.hpp"
#include "kuramoto/model.hpp"
#include "test_util.hpp"

using namespace kuramoto;
using std::numbers::pi;

namespace {

ModelParams pair_params() {
  return ModelParams::homogeneous(2, 1.0, 1.0, 1.0);
}

}  // namespace

TEST_CASE("rhs at identical-phase rest state is zero") {
  const auto d = rhs({{0.0, 0.0}, {0.0, 0.0}}, pair_params());
  CHECK(d.dtheta == std::vector<double>{0.0, 0.0});
  CHECK(d.domega == std::vector<double>{0.0, 0.0});
}

TEST_CASE("rhs quarter-turn pair") {
  const auto d = rhs({{0.0, pi / 2}, {0.0, 0.0}}, pair_params());
  CHECK(d.domega[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.domega[1] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("rhs without coupling is pure damping") {
  std::mt19937_64 rng(3);
  auto p = testutil::random_params(rng, 5);
  ModelParams q(p.masses(), p.frictions(), std::vector<double>(5, 0.0), 0.0, p.capacity());
  OscillatorEnsemble s{testutil::uniform_vec(rng, 5, -3, 3), testutil::uniform_vec(rng, 5, -2, 2)};
  const auto d = rhs(s, q);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(d.dtheta[i] == s.omega[i]);
    CHECK(d.domega[i] == (-q.frictions()[i] * s.omega[i]) / q.masses()[i]);
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(rhs({{0.0}, {0.0, 1.0}}, pair_params()), Error);
  try {
    rhs({{0.0, NAN}, {0.0, 0.0}}, pair_params());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFinite);
  }
  try {
    rhs({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}, pair_params());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimensionMismatch);
  }
  try {
    CapacityMatrix(2, {0.0, 1.0, 0.5, 0.0});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
  CHECK_THROWS_AS(CapacityMatrix(2, {0.0, -1.0, -1.0, 0.0}), Error);
  CHECK_THROWS_AS(ModelParams::homogeneous(2, 0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(ModelParams::homogeneous(2, 1.0, -1.0, 1.0), Error);
  CHECK_THROWS_AS(ModelParams::homogeneous(2, 1.0, 1.0, -1.0), Error);
}

TEST_CASE("variant detection") {
  CHECK(ModelParams::homogeneous(4, 1.0, 1.0, 1.0).variant() == ModelVariant::HomogeneousAllToAll);
  std::mt19937_64 rng(1);
  CHECK(testutil::random_params(rng, 4).variant() == ModelVariant::HeterogeneousNetwork);
  ModelParams uneven({1, 1}, {1, 1}, {0, 0.1}, 1.0, CapacityMatrix::all_to_all(2));
  CHECK(uneven.variant() == ModelVariant::HeterogeneousNetwork);
  CHECK(uneven.uniform_inertia());
}

TEST_CASE("equilibrium residual") {
  const auto p4 = ModelParams::homogeneous(4, 1.0, 1.0, 1.0);
  for (double r : equilibrium_residual(std::vector<double>(4, 0.7), p4)) CHECK(r == 0.0);
  for (std::size_t n : {3u, 4u, 7u}) {
    const auto p = ModelParams::homogeneous(n, 1.0, 1.0, 1.0);
    for (double r : equilibrium_residual(testutil::splay(n), p)) CHECK(std::abs(r) < 1e-15);
  }
  const auto r = equilibrium_residual(std::vector<double>{0.0, pi / 2}, pair_params());
  CHECK(r[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK_THROWS_AS(equilibrium_residual(std::vector<double>{0.0}, pair_params()), Error);
}

TEST_CASE("potential values") {
  CHECK(potential(std::vector<double>{0.4, 0.4}, pair_params()) == 0.0);
  CHECK(potential(std::vector<double>{0.0, pi}, pair_params()) == doctest::Approx(1.0).epsilon(1e-15));
  const auto p4 = ModelParams::homogeneous(4, 1.0, 1.0, 1.0);
  CHECK(potential(testutil::splay(4), p4) == doctest::Approx(2.0).epsilon(1e-14));
  // uniform fast path against the double sum
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rep % 9;
    const auto th = testutil::uniform_vec(rng, n, -pi, pi);
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ref += 1.0 - std::cos(th[i] - th[j]);
    CHECK(pairwise_dissonance(th) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("gradient identities") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 15;
    const auto p = rep % 2 ? testutil::random_params(rng, n) : ModelParams::homogeneous(n, 1.0, 1.0, 0.8, 0.3);
    auto th = testutil::uniform_vec(rng, n, -pi, pi);
    const auto g = grad_potential(th, p);
    const auto r = equilibrium_residual(th, p);
    for (std::size_t i = 0; i < n; ++i) CHECK(g[i] + r[i] == 0.0);

    const double h = 1e-5;
    for (std::size_t i = 0; i < n; ++i) {
      const double t0 = th[i];
      th[i] = t0 + h;
      const double vp = potential(th, p);
      th[i] = t0 - h;
      const double vm = potential(th, p);
      th[i] = t0;
      CHECK(std::abs((vp - vm) / (2 * h) - g[i]) < 1e-6);
    }

    std::vector<double> c(n);
    coupling_into(th, p, c);
    double sum = 0.0;
    double scale = 0.0;
    for (double x : c) {
      sum += x;
      scale += std::abs(x);
    }
    CHECK(std::abs(sum) <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("rhs is translation equivariant for constant nu") {
  std::mt19937_64 rng(8);
  const auto p = ModelParams::homogeneous(6, 0.7, 1.1, 2.0, 0.25);
  OscillatorEnsemble s{testutil::uniform_vec(rng, 6, -pi, pi), testutil::uniform_vec(rng, 6, -1, 1)};
  OscillatorEnsemble shifted = s;
  for (double& t : shifted.theta) t += 0.8;
  const auto a = rhs(s, p);
  const auto b = rhs(shifted, p);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a.domega[i] == doctest::Approx(b.domega[i]).epsilon(1e-12));
}

TEST_CASE("comoving shift") {
  const auto p = pair_params();
  const OscillatorEnsemble centered{{-0.5, 0.5}, {0.25, -0.25}};
  CHECK(comoving_shift(centered, p) == centered);
  const auto s = comoving_shift({{1.0, 3.0}, {2.0, 2.0}}, p);
  CHECK(s == OscillatorEnsemble{{-1.0, 1.0}, {0.0, 0.0}});

  std::mt19937_64 rng(2);
  const auto p5 = ModelParams::homogeneous(5, 1.0, 1.0, 1.0);
  OscillatorEnsemble r{testutil::uniform_vec(rng, 5, -3, 3), testutil::uniform_vec(rng, 5, -1, 1)};
  const auto rs = comoving_shift(r, p5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(rs.theta[i] - rs.theta[j] == doctest::Approx(r.theta[i] - r.theta[j]).epsilon(1e-12));
      CHECK(rs.omega[i] - rs.omega[j] == doctest::Approx(r.omega[i] - r.omega[j]).epsilon(1e-12));
    }
  }

  ModelParams hetero({1.0, 2.0}, {1.0, 1.0}, {0.0, 0.0}, 1.0, CapacityMatrix::all_to_all(2));
  try {
    comoving_shift(centered, hetero);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::WrongVariant);
  }
}
