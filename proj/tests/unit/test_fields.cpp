#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "pmiflow/errors.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/random.hpp"

using namespace pmiflow;

namespace {

GmmField unit_gaussian(std::size_t n) { return GmmField::single(StateVec(n, 0.0), StateVec(n, 1.0)); }

// Closed-form velocity of the standard Gaussian field.
double unit_velocity(double z, double t) { return (2.0 * t - 1.0) * z / ((1 - t) * (1 - t) + t * t); }

GmmField random_mixture(std::size_t n, std::size_t k, std::uint64_t seed) {
  auto eng = make_engine(RngSeed{seed});
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.05, 1.5);
  std::vector<GaussComponent> comps;
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) total += (x = unif(eng));
  for (std::size_t c = 0; c < k; ++c) {
    StateVec mu(n), var(n);
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = 2.0 * normal(eng);
      var[i] = unif(eng);
    }
    comps.push_back({w[c] / total, mu, var});
  }
  // Renormalize the last weight so the sum is 1 to rounding.
  double s = 0.0;
  for (std::size_t c = 0; c + 1 < k; ++c) s += comps[c].weight;
  comps.back().weight = 1.0 - s;
  return GmmField(comps);
}

// Reference integrator for the single-Gaussian ODE, independent of the closed form.
StateVec odeint_map(const StateVec& mu, const StateVec& var, const StateVec& z, double t0, double t1) {
  using namespace boost::numeric::odeint;
  std::vector<double> x(z.data());
  auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy, double t) {
    dy.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s = (1 - t) * (1 - t) * var[i] + t * t;
      const double d = y[i] - (1 - t) * mu[i];
      const double e0 = mu[i] + (1 - t) * var[i] / s * d;
      const double e1 = t / s * d;
      dy[i] = e1 - e0;
    }
  };
  auto stepper = make_controlled(1e-13, 1e-13, runge_kutta_dopri5<std::vector<double>>());
  const double dt = t1 > t0 ? 1e-3 : -1e-3;
  integrate_adaptive(stepper, rhs, x, t0, t1, dt);
  return StateVec(x);
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("unit Gaussian velocity at t = 0.5, 1, 0") {
  const auto f = unit_gaussian(3);
  const StateVec z{0.3, -1.2, 2.5};
  const auto v_half = gmm_velocity(f, z, 0.5);
  const auto v_one = gmm_velocity(f, z, 1.0);
  const auto v_zero = gmm_velocity(f, z, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(v_half[i]) < 1e-15);
    CHECK(v_one[i] == doctest::Approx(z[i]).epsilon(1e-15));
    CHECK(v_zero[i] == doctest::Approx(-z[i]).epsilon(1e-15));
  }
}

TEST_CASE("single-Gaussian reduction matches the scalar closed form") {
  const auto f = unit_gaussian(8);
  auto eng = make_engine(RngSeed{3});
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto z = sample_standard_normal(8, RngSeed{100u + k}, 1).front() * 3.0;
    const double t = ut(eng);
    const auto v = f.velocity(z, t);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(v[i] - unit_velocity(z[i], t)) < 1e-12);
  }
}

TEST_CASE("conditional means at the endpoints and interpolation consistency") {
  const auto f = random_mixture(5, 3, 11);
  const StateVec z{0.1, -0.4, 2.0, 1.1, -3.0};
  CHECK(max_abs_diff(f.conditional_means(z, 0.0).zhat0, z) < 1e-12);
  CHECK(max_abs_diff(f.conditional_means(z, 1.0).zhat1, z) < 1e-12);

  auto eng = make_engine(RngSeed{5});
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const auto zz = sample_standard_normal(5, RngSeed{1000u + k}, 1).front() * 2.5;
    const double t = ut(eng);
    const auto cm = gmm_conditional_means(f, zz, t);
    const StateVec recon = (1.0 - t) * cm.zhat0 + t * cm.zhat1;
    CHECK(max_abs_diff(recon, zz) < 1e-10);
  }
}

TEST_CASE("responsibilities are a probability vector") {
  const auto f = random_mixture(6, 4, 12);
  for (int k = 0; k < 200; ++k) {
    const auto z = sample_standard_normal(6, RngSeed{2000u + k}, 1).front() * 4.0;
    const double t = 0.005 * (k % 200);
    const auto r = f.responsibilities(z, t);
    double s = 0.0;
    for (double x : r) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("log-domain stability for large states and dimensions") {
  const std::size_t n = 10000;
  std::vector<GaussComponent> comps;
  comps.push_back({0.5, StateVec(n, 1.0), StateVec(n, 0.3)});
  comps.push_back({0.5, StateVec(n, -1.0), StateVec(n, 0.3)});
  const GmmField f(comps);
  auto z = sample_standard_normal(n, RngSeed{9}, 1).front();
  z *= 1000.0 / l2_norm(z);
  for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    const auto v = f.velocity(z, t);
    CHECK(v.all_finite());
    const auto r = f.responsibilities(z, t);
    CHECK(std::isfinite(r[0]));
  }
}

TEST_CASE("field argument errors") {
  const auto f = unit_gaussian(2);
  CHECK_THROWS_AS(f.velocity(StateVec{1.0, 2.0}, 1.5), InvalidArgument);
  CHECK_THROWS_AS(f.velocity(StateVec{1.0, 2.0}, -0.1), InvalidArgument);
  const auto point = GmmField::single(StateVec{0.5, 0.5}, StateVec{0.0, 0.0});
  CHECK_THROWS_AS(point.velocity(StateVec{0.5, 0.5}, 0.0), SingularField);
  CHECK(point.velocity(StateVec{0.5, 0.5}, 0.5).all_finite());
  CHECK_THROWS_AS(GmmField({{0.5, StateVec{0.0}, StateVec{1.0}}}), InvalidArgument);
  CHECK_THROWS_AS(GmmField({{1.0, StateVec{0.0}, StateVec{-1.0}}}), InvalidArgument);
  CHECK_THROWS_AS(
      GmmField({{0.5, StateVec{0.0}, StateVec{1.0}}, {0.5, StateVec{0.0, 1.0}, StateVec{1.0, 1.0}}}),
      InvalidArgument);
}

TEST_CASE("exact map examples") {
  const StateVec mu{0.0}, var{1.0};
  const StateVec z{1.0};
  CHECK(linear_field_exact_map(mu, var, z, 0.4, 0.4) == z);
  const auto fwd = linear_field_exact_map(mu, var, z, 0.0, 1.0);
  CHECK(std::abs(std::abs(fwd[0]) - 1.0) < 1e-12);
  const auto back = linear_field_exact_map(mu, var, fwd, 1.0, 0.0);
  CHECK(std::abs(back[0] - z[0]) < 1e-9);

  const StateVec mu3{0.5, -1.0, 2.0}, var3{0.25, 2.0, 0.7};
  const StateVec z3{0.3, 0.1, -0.7};
  const auto there = linear_field_exact_map(mu3, var3, z3, 0.0, 1.0);
  CHECK(max_abs_diff(linear_field_exact_map(mu3, var3, there, 1.0, 0.0), z3) < 1e-9);
}

TEST_CASE("exact map agrees with an adaptive Runge-Kutta oracle") {
  const StateVec mu{0.5, -1.0, 2.0, 0.0}, var{0.25, 2.0, 0.7, 1.0};
  const auto f = GmmField::single(mu, var);
  const std::array<std::pair<double, double>, 5> spans{
      {{0.0, 1.0}, {1.0, 0.0}, {0.3, 0.38}, {0.9, 0.1}, {0.0, 0.5}}};
  for (int k = 0; k < 10; ++k) {
    const auto z = sample_standard_normal(4, RngSeed{300u + k}, 1).front();
    for (auto [a, b] : spans) {
      const auto closed = linear_field_exact_map(mu, var, z, a, b);
      const auto oracle = odeint_map(mu, var, z, a, b);
      CHECK(max_abs_diff(closed, oracle) < 1e-10);
    }
  }
  // The oracle integrates the field's own formula.
  const StateVec z{0.2, 0.2, 0.2, 0.2};
  const auto v = f.velocity(z, 0.37);
  const auto z_next = odeint_map(mu, var, z, 0.37, 0.37 + 1e-6);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs((z_next[i] - z[i]) / 1e-6 - v[i]) < 1e-5);
}

TEST_CASE("perturbed field") {
  auto base = std::make_shared<GmmField>(unit_gaussian(16));
  const PerturbedField silent(base, 0.0, RngSeed{1});
  const StateVec z = sample_standard_normal(16, RngSeed{2}, 1).front();
  CHECK(silent.velocity(z, 0.3) == base->velocity(z, 0.3));

  const PerturbedField noisy(base, 0.2, RngSeed{1});
  CHECK(perturbed_velocity(noisy, z, 0.3) == perturbed_velocity(noisy, z, 0.3));
  CHECK_FALSE(noisy.velocity(z, 0.3) == noisy.velocity(z, 0.31));
  const PerturbedField other(base, 0.2, RngSeed{2});
  CHECK_FALSE(noisy.velocity(z, 0.3) == other.velocity(z, 0.3));

  double acc = 0.0;
  const int probes = 1000;
  for (int k = 0; k < probes; ++k) {
    const auto zz = sample_standard_normal(16, RngSeed{5000u + k}, 1).front();
    const double t = (k + 0.5) / probes;
    acc += l2_norm(noisy.velocity(zz, t) - base->velocity(zz, t)) / std::sqrt(16.0);
  }
  CHECK(acc / probes == doctest::Approx(0.2).epsilon(0.2));
}

TEST_CASE("shifted mixtures and data densities") {
  const auto f = random_mixture(3, 2, 4);
  const auto g = f.shifted(0, 2.0);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(g.components()[k].mean[0] == f.components()[k].mean[0] + 2.0);
    CHECK(g.components()[k].mean[1] == f.components()[k].mean[1]);
  }
  const auto one = unit_gaussian(2);
  const double expect = -std::log(2.0 * M_PI) - 0.5 * (0.25 + 1.0);
  CHECK(one.data_log_density(StateVec{0.5, -1.0}) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(g.shifted(3, 1.0), InvalidArgument);
}

}  // TEST_SUITE
