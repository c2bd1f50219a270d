#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

#include "pmiflow/errors.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/metrics.hpp"
#include "pmiflow/random.hpp"

using namespace pmiflow;

TEST_SUITE("metrics") {

TEST_CASE("reconstruction metric examples") {
  const StateVec a{0.2, -0.4, 1.0};
  const auto same = reconstruction_metrics(a, a, 1.0);
  CHECK(same.mse == 0.0);
  CHECK(same.psnr_db == std::numeric_limits<double>::infinity());

  const auto unit = reconstruction_metrics(StateVec(8, 0.0), StateVec(8, 1.0), 1.0);
  CHECK(unit.mse == 1.0);
  CHECK(unit.rmse == 1.0);
  CHECK(unit.max_abs_err == 1.0);
  CHECK(std::abs(unit.psnr_db) < 1e-12);

  const StateVec b{0.1, 0.0, 1.3};
  const auto m1 = reconstruction_metrics(a, b, 1.5);
  const auto m2 = reconstruction_metrics(2.0 * a, 2.0 * b, 3.0);
  CHECK(m2.psnr_db == doctest::Approx(m1.psnr_db).epsilon(1e-12));
  CHECK(m1.rmse == doctest::Approx(std::sqrt(m1.mse)));
  CHECK(m1.psnr_db == doctest::Approx(20 * std::log10(1.5) - 10 * std::log10(m1.mse)));

  CHECK_THROWS_AS(reconstruction_metrics(a, StateVec{1.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(reconstruction_metrics(a, b, 0.0), InvalidArgument);
  CHECK(default_peak(a) == doctest::Approx(1.4));
  CHECK(default_peak(StateVec(3, 2.0)) == 1.0);
  CHECK(reconstruction_metrics(a, b).peak == doctest::Approx(1.4));
}

TEST_CASE("triangle inequality and psnr monotonicity") {
  for (int k = 0; k < 300; ++k) {
    const auto x = sample_standard_normal(7, RngSeed{10u + k}, 3);
    const double ac = reconstruction_metrics(x[0], x[2], 1.0).rmse;
    const double ab = reconstruction_metrics(x[0], x[1], 1.0).rmse;
    const double bc = reconstruction_metrics(x[1], x[2], 1.0).rmse;
    CHECK(ac <= ab + bc + 1e-14);
  }
  const StateVec z(4, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double e : {1e-6, 1e-3, 0.1, 1.0, 10.0}) {
    const double p = reconstruction_metrics(z, StateVec(4, e), 2.0).psnr_db;
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("error vs steps on a constant field") {
  const ConstantField c(StateVec{0.3, -0.2});
  const auto rows = error_vs_steps_curve(c, StateVec{1.0, 1.0}, SolverKind::heun, CorrectionConfig{}, {4, 8, 16});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.rmse < 1e-14);
    REQUIRE(r.pmi_rmse.has_value());
    CHECK(*r.pmi_rmse < 1e-14);
    CHECK(r.nfe == *r.pmi_nfe);
  }
  CHECK(rows[1].nfe == 2 * 2 * 8);
  CHECK_THROWS_AS(error_vs_steps_curve(c, StateVec{1.0, 1.0}, SolverKind::euler, std::nullopt, {}),
                  InvalidArgument);
  CHECK_FALSE(error_vs_steps_curve(c, StateVec{1.0, 1.0}, SolverKind::euler, std::nullopt, {3}).front().pmi_rmse);
}

TEST_CASE("euler curve on the single Gaussian halves per doubling") {
  const auto f = GmmField::single(StateVec{0.5, -0.5, 1.0}, StateVec{0.25, 0.5, 1.5});
  const auto rows = error_vs_steps_curve(f, StateVec{0.3, 0.9, -0.4}, SolverKind::euler, std::nullopt, {10, 20, 40});
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double ratio = rows[i].rmse / rows[i + 1].rmse;
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}

TEST_CASE("leg errors against the exact map") {
  const auto f = GmmField::single(StateVec{0.5, -0.5}, StateVec{0.25, 0.5});
  const auto rows = exact_map_leg_errors(f, StateVec{0.3, 0.9}, SolverKind::heun, std::nullopt, {25, 50});
  CHECK(rows[0].inversion_rmse / rows[1].inversion_rmse == doctest::Approx(4.0).epsilon(0.2));
  const GmmField two({{0.5, StateVec{0.0}, StateVec{1.0}}, {0.5, StateVec{1.0}, StateVec{1.0}}});
  CHECK_THROWS_AS(exact_map_leg_errors(two, StateVec{0.0}, SolverKind::euler, std::nullopt, {4}), InvalidArgument);
}

TEST_CASE("perturbed curve: PMI column at most vanilla at small N" * doctest::may_fail()) {
  const auto base = std::make_shared<GmmField>(GmmField::single(StateVec(16, 0.5), StateVec(16, 0.25)));
  const std::vector<std::size_t> ns{4, 8};
  std::vector<double> plain(ns.size()), pmi(ns.size());
  for (std::uint64_t s = 0; s < 64; ++s) {
    const PerturbedField f(base, 0.2, RngSeed{s});
    auto eng = make_engine(RngSeed{1000 + s});
    const auto rows = error_vs_steps_curve(f, base->sample_data(eng), SolverKind::euler, CorrectionConfig{}, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      plain[i] += rows[i].rmse;
      pmi[i] += *rows[i].pmi_rmse;
    }
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    MESSAGE("N=" << ns[i] << " plain " << plain[i] / 64 << " pmi " << pmi[i] / 64);
    CHECK(pmi[i] <= plain[i]);
  }
}

}  // TEST_SUITE
