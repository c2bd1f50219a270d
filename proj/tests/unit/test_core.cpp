#include <doctest.h>

#include <cmath>
#include <limits>

#include "pmiflow/correction_config.hpp"
#include "pmiflow/errors.hpp"
#include "pmiflow/random.hpp"
#include "pmiflow/state.hpp"
#include "pmiflow/time_grid.hpp"

using namespace pmiflow;

TEST_SUITE("core") {

TEST_CASE("uniform grids") {
  const auto g1 = make_uniform_grid(1, 1.0);
  REQUIRE(g1.steps() == 1);
  CHECK(g1[0] == 0.0);
  CHECK(g1[1] == 1.0);

  const auto g2 = make_uniform_grid(2, 1.0);
  CHECK(g2[1] == 0.5);
  CHECK(g2[2] == 1.0);

  const auto g4 = make_uniform_grid(4, 2.0);
  const double expected[] = {0.0, 0.5, 1.0, 1.5, 2.0};
  REQUIRE(g4.times().size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(g4[i] == doctest::Approx(expected[i]).epsilon(1e-15));
  CHECK(g4.total_time() == 2.0);
  CHECK(g4.dt(1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(make_uniform_grid(0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_uniform_grid(3, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_uniform_grid(3, -1.0), InvalidArgument);
}

TEST_CASE("grid invariants on construction") {
  CHECK_THROWS_AS(TimeGrid({0.0}), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.7, 0.3}), InvalidArgument);
  const TimeGrid g({0.0, 0.1, 0.5, 1.0});
  for (std::size_t i = 1; i <= g.steps(); ++i) CHECK(g.dt(i) > 0.0);
  CHECK_THROWS_AS(g.dt(0), InvalidArgument);
  CHECK_THROWS_AS(g.dt(4), InvalidArgument);

  for (std::size_t n : {1u, 3u, 7u, 30u, 1000u}) {
    const auto g = make_uniform_grid(n, 1.0);
    CHECK(g[0] == 0.0);
    CHECK(g[n] == 1.0);
    for (std::size_t i = 1; i <= n; ++i) CHECK(g[i] > g[i - 1]);
  }
}

TEST_CASE("state vectors reject empty and non-finite values") {
  CHECK_THROWS_AS(StateVec(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(StateVec(0), InvalidArgument);
  CHECK_THROWS_AS(StateVec({1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  CHECK_THROWS_AS(StateVec({std::numeric_limits<double>::infinity()}), InvalidArgument);
  const StateVec a{3.0, 4.0};
  CHECK(l2_norm(a) == 5.0);
  CHECK(dot(a, StateVec{1.0, 1.0}) == 7.0);
  CHECK(l2_norm(StateVec{1e300, 1e300}) == doctest::Approx(std::sqrt(2.0) * 1e300));
  CHECK_THROWS_AS(a + StateVec{1.0}, InvalidArgument);
}

TEST_CASE("standard normal sampling is deterministic") {
  const auto a = sample_standard_normal(5, RngSeed{42}, 3);
  const auto b = sample_standard_normal(5, RngSeed{42}, 3);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
  const auto c = sample_standard_normal(5, RngSeed{43}, 3);
  CHECK_FALSE(a[0] == c[0]);
  CHECK_THROWS_AS(sample_standard_normal(0, RngSeed{1}, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_standard_normal(3, RngSeed{1}, 0), InvalidArgument);
}

TEST_CASE("squared norm concentrates at n = 10000") {
  // P(|‖z‖²/n - 1| > 0.1) is about 1e-12 at n = 1e4; 200 draws all inside.
  int inside = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto z = sample_standard_normal(10000, RngSeed{s}, 1).front();
    const double r = squared_norm(z) / 10000.0;
    if (r >= 0.9 && r <= 1.1) ++inside;
  }
  CHECK(inside >= 198);
}

TEST_CASE("coordinate means over 1e5 samples") {
  const std::size_t n = 4, count = 100000;
  const auto zs = sample_standard_normal(n, RngSeed{7}, count);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (const auto& z : zs) m += z[i];
    m /= static_cast<double>(count);
    CHECK(std::abs(m) < 0.02);
  }
}

TEST_CASE("hashed normals have unit variance") {
  double s = 0.0, s2 = 0.0;
  const int count = 200000;
  for (int k = 0; k < count; ++k) {
    const double x = hashed_normal(mix64(static_cast<std::uint64_t>(k)));
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / count) < 0.01);
  CHECK(s2 / count == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("correction config defaults and validation") {
  CorrectionConfig c;
  CHECK(c.lambda == 10.0);
  CHECK(c.epsilon == 2.0);
  CHECK(c.w == 0.94);
  CHECK(c.ema_alpha == 0.9);
  CHECK(c.grad_tol == 1e-12);
  CHECK(c.norm_choice == NormChoice::l1);
  CHECK(c.averaging == AveragingScheme::integral);
  CHECK(c.average_source == AverageSource::corrected);
  CHECK(c.interp_mode == InterpMode::projection);
  CHECK_NOTHROW(c.validate());

  c.lambda = -1.0;
  try {
    c.validate();
    FAIL("expected a validation error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()) == "lambda must be positive");
  }
  c = {};
  c.epsilon = -0.1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.w = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.ema_alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);

  CHECK(parse_norm_choice("l2") == NormChoice::l2);
  CHECK(to_string(AveragingScheme::ema) == "ema");
  CHECK_THROWS_AS(parse_interp_mode("sideways"), InvalidArgument);
}

}  // TEST_SUITE
