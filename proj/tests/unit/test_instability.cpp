#include <doctest.h>

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "pmiflow/errors.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/instability.hpp"
#include "pmiflow/pmi.hpp"

using namespace pmiflow;

namespace {

StateVec apply(const Eigen::MatrixXd& a, const StateVec& z) {
  const Eigen::Map<const Eigen::VectorXd> x(z.data().data(), static_cast<Eigen::Index>(z.size()));
  const Eigen::VectorXd y = a * x;
  return StateVec(std::vector<double>(y.data(), y.data() + y.size()));
}

Eigen::MatrixXd random_orthogonal(int n, unsigned seed) {
  std::srand(seed);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

}  // namespace

TEST_SUITE("instability") {

TEST_CASE("identity flow map") {
  const FlowMap id{std::make_shared<ConstantField>(StateVec(6, 0.0)), make_uniform_grid(5),
                   SolverKind::heun, FlowDirection::noise_to_data};
  const auto rep = instability_coefficient(id, StateVec{0.3, -1.0, 2.0, 0.0, 0.5, 1.0}, 6, 1e-4, RngSeed{1});
  CHECK(std::abs(rep.coefficient - 1.0) < 1e-8);
  CHECK(rep.probes == 6);
  CHECK(rep.probe_step == 1e-4);
  CHECK_FALSE(rep.subsampled);
  CHECK(rep.per_probe_log_amps.size() == 6);
}

TEST_CASE("diagonal linear flow with canonical probes") {
  const FlowMap m{std::make_shared<ScalingField>(StateVec{1.0, -0.5}), make_uniform_grid(8),
                  SolverKind::euler, FlowDirection::data_to_noise};
  const auto out = m(StateVec{1.0, 1.0});
  CHECK(std::abs(out[0] - 2.0) < 1e-12);
  CHECK(std::abs(out[1] - 0.5) < 1e-12);
  const auto rep = instability_coefficient(m, StateVec{0.4, -0.7}, 2, 1e-4, RngSeed{1}, ProbeBasis::canonical);
  CHECK(std::abs(rep.coefficient - 1.0) < 1e-6);
  CHECK(std::abs(rep.per_probe_log_amps[0] - std::log(2.0)) < 1e-6);
}

TEST_CASE("uniform doubling") {
  for (std::size_t n : {1u, 3u, 20u}) {
    const FlowMap m{std::make_shared<ScalingField>(StateVec(n, 1.0)), make_uniform_grid(4),
                    SolverKind::euler, FlowDirection::data_to_noise};
    const auto rep = instability_coefficient(m, StateVec(n, 0.25), n, 1e-4, RngSeed{n});
    CHECK(std::abs(rep.coefficient - 2.0) < 1e-6);
  }
  const MapFn twice = [](const StateVec& z) { return 2.0 * z; };
  const auto rep = instability_coefficient(twice, StateVec(300, 1.0), 16, 1e-4, RngSeed{1});
  CHECK(rep.subsampled);
  CHECK(std::abs(rep.coefficient - 2.0) < 1e-6);
}

TEST_CASE("random probes are orthonormal") {
  const auto q = random_orthonormal_probes(12, 7, RngSeed{3});
  REQUIRE(q.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) CHECK(std::abs(dot(q[i], q[j]) - (i == j ? 1.0 : 0.0)) < 1e-12);
  }
  CHECK(random_orthonormal_probes(12, 7, RngSeed{3})[4] == q[4]);
  CHECK_THROWS_AS(random_orthonormal_probes(3, 4, RngSeed{1}), InvalidArgument);
}

TEST_CASE("rotation composition leaves the coefficient unchanged") {
  const auto field = std::make_shared<GmmField>(GmmField(
      {{0.4, StateVec{1.0, 0.0, -1.0, 0.5}, StateVec(4, 0.3)}, {0.6, StateVec{-1.0, 0.5, 1.0, 0.0}, StateVec(4, 0.5)}}));
  const FlowMap m{field, make_uniform_grid(20), SolverKind::heun, FlowDirection::data_to_noise};
  const Eigen::MatrixXd q = random_orthogonal(4, 11);
  const MapFn plain = [&](const StateVec& z) { return m(z); };
  const MapFn rotated = [&](const StateVec& z) { return apply(q, m(z)); };
  const StateVec z{0.2, 0.1, -0.3, 0.4};
  const auto a = instability_coefficient(plain, z, 4, 1e-5, RngSeed{2});
  const auto b = instability_coefficient(rotated, z, 4, 1e-5, RngSeed{2});
  CHECK(std::abs(a.coefficient - b.coefficient) < 1e-6 * a.coefficient);
}

TEST_CASE("log-domain accumulation survives e^300 amplification") {
  const double big = std::exp(300.0);
  const MapFn huge = [big](const StateVec& z) { return big * z; };
  const auto rep = instability_coefficient(huge, StateVec(3, 1e-3), 3, 1e-4, RngSeed{1});
  CHECK(std::isfinite(rep.log_coefficient));
  CHECK(std::abs(rep.log_coefficient - 300.0) < 1e-6);
}

TEST_CASE("singular basis reproduces the geometric mean of singular values") {
  const int n = 5;
  const Eigen::MatrixXd u = random_orthogonal(n, 21), v = random_orthogonal(n, 22);
  Eigen::VectorXd sigma(n);
  sigma << 3.0, 1.5, 0.7, 0.2, 0.05;
  const Eigen::MatrixXd a = u * sigma.asDiagonal() * v.transpose();
  std::vector<StateVec> probes;
  for (int i = 0; i < n; ++i) {
    probes.emplace_back(std::vector<double>(v.col(i).data(), v.col(i).data() + n));
  }
  const MapFn lin = [&](const StateVec& z) { return apply(a, z); };
  const auto rep = instability_coefficient_with_probes(lin, StateVec(n, 0.1), probes, 1e-4);
  CHECK(std::abs(rep.coefficient - std::pow(3.0 * 1.5 * 0.7 * 0.2 * 0.05, 1.0 / n)) < 1e-8);
}

TEST_CASE("argument and evaluation errors") {
  const MapFn id = [](const StateVec& z) { return z; };
  CHECK_THROWS_AS(instability_coefficient(id, StateVec(3, 0.0), 0, 1e-4, RngSeed{1}), InvalidArgument);
  CHECK_THROWS_AS(instability_coefficient(id, StateVec(3, 0.0), 4, 1e-4, RngSeed{1}), InvalidArgument);
  CHECK_THROWS_AS(instability_coefficient(id, StateVec(3, 0.0), 3, 0.0, RngSeed{1}), InvalidArgument);
  int calls = 0;
  const MapFn flaky = [&calls](const StateVec& z) {
    if (++calls == 3) throw NumericFailure("field blew up");
    return z;
  };
  try {
    (void)instability_coefficient(flaky, StateVec(3, 0.0), 3, 1e-4, RngSeed{1});
    FAIL("expected a failure");
  } catch (const NumericFailure& e) {
    CHECK(std::string(e.what()).find("probe 1") != std::string::npos);
  }
}

TEST_CASE("norm threshold statistics") {
  const auto zs = sample_standard_normal(1024, RngSeed{5}, 10000);
  const auto s = norm_threshold_stats(zs);
  CHECK(s.exceed_fraction < 0.02);
  CHECK(s.threshold == doctest::Approx(2048 + 3 * std::sqrt(2048.0)));
  CHECK(s.mean_radial == doctest::Approx(1.0).epsilon(0.01));

  const auto zero = norm_threshold_stats(std::vector<StateVec>(10, StateVec(64, 0.0)));
  CHECK(zero.exceed_fraction == 0.0);
  CHECK(zero.mean_radial == 0.0);

  for (std::size_t n : {256u, 1024u}) {
    auto scaled = sample_standard_normal(n, RngSeed{n}, 2000);
    for (auto& z : scaled) z *= 2.0;
    CHECK(norm_threshold_stats(scaled).exceed_fraction > 0.99);
  }
  CHECK_THROWS_AS(norm_threshold_stats({}), InvalidArgument);
}

TEST_CASE("gaussianity report") {
  const auto zs = sample_standard_normal(64, RngSeed{8}, 10000);
  const auto g = gaussianity_report(zs);
  CHECK(std::abs(g.pooled_mean) < 0.03);
  CHECK(g.pooled_variance >= 0.95);
  CHECK(g.pooled_variance <= 1.05);
  CHECK(g.radial_quartiles[0] < g.radial_quartiles[1]);
  CHECK(g.radial_quartiles[1] < g.radial_quartiles[2]);
  CHECK(g.threshold.count == 10000);

  const auto c = gaussianity_report(std::vector<StateVec>(5, StateVec{1.0, 2.0}));
  CHECK(c.pooled_variance == 0.0);
  CHECK_THROWS_AS(gaussianity_report({StateVec{1.0}}), InvalidArgument);
}

TEST_CASE("PMI latents on the perturbed field sit closer to the unit shell" * doctest::may_fail()) {
  const auto base = std::make_shared<GmmField>(GmmField::single(StateVec(16, 0.5), StateVec(16, 0.25)));
  const auto grid = make_uniform_grid(30);
  std::vector<StateVec> with, without;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const PerturbedField f(base, 0.2, RngSeed{s});
    auto eng = make_engine(RngSeed{1000 + s});
    const auto z0 = base->sample_data(eng);
    without.push_back(run_inversion(f, z0, grid, SolverKind::euler).final_state());
    with.push_back(pmi_invert(f, z0, grid, SolverKind::euler, CorrectionConfig{}).final_state());
  }
  const auto gw = gaussianity_report(with), go = gaussianity_report(without);
  double dw = 0.0, dn = 0.0;
  for (int q = 0; q < 3; ++q) {
    dw += std::abs(gw.radial_quartiles[q] - 1.0);
    dn += std::abs(go.radial_quartiles[q] - 1.0);
  }
  MESSAGE("quartile distance to 1: PMI " << dw << ", plain " << dn);
  CHECK(dw < dn);
}

}  // TEST_SUITE
