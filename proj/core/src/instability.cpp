#include "pmiflow/instability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmiflow/errors.hpp"
#include "pmiflow/pmi.hpp"

namespace pmiflow {

StateVec FlowMap::operator()(const StateVec& z) const {
  if (!field) throw InvalidArgument("FlowMap has no field");
  const Trajectory traj = direction == FlowDirection::data_to_noise
                              ? run_inversion(*field, z, grid, kind)
                              : run_sampling(*field, z, grid, kind);
  return traj.final_state();
}

std::vector<StateVec> random_orthonormal_probes(std::size_t n, std::size_t m, RngSeed seed) {
  if (m == 0 || m > n) throw InvalidArgument("probe count must lie in [1, n]");
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<StateVec> q;
  q.reserve(m);
  while (q.size() < m) {
    StateVec u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = normal(engine);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& prev : q) u.add_scaled(-dot(u, prev), prev);
    }
    const double len = l2_norm(u);
    if (len < 1e-10) continue;
    q.push_back(u / len);
  }
  return q;
}

InstabilityReport instability_coefficient_with_probes(const MapFn& map, const StateVec& z,
                                                      const std::vector<StateVec>& probes,
                                                      double h) {
  if (!(h > 0.0)) throw InvalidArgument("probe step h must be positive");
  if (probes.empty() || probes.size() > z.size()) {
    throw InvalidArgument("probe count must lie in [1, n]");
  }
  InstabilityReport report;
  report.probes = probes.size();
  report.dim = z.size();
  report.probe_step = h;
  report.subsampled = probes.size() < z.size();

  const StateVec base = map(z);
  double sum = 0.0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const StateVec& u = probes[k];
    require_same_dim(u, z, "instability probe");
    double log_amp = 0.0;
    try {
      StateVec shifted = z;
      shifted.add_scaled(h, u);
      const StateVec jv = (map(shifted) - base) / h;
      const double amp = l2_norm(jv);
      const double len = l2_norm(u);
      if (!(amp > 0.0) || !std::isfinite(amp)) {
        throw NumericFailure("directional derivative is zero or non-finite");
      }
      log_amp = std::log(amp) - std::log(len);
    } catch (const std::exception& e) {
      throw NumericFailure("instability probe " + std::to_string(k) + ": " + e.what());
    }
    report.per_probe_log_amps.push_back(log_amp);
    sum += log_amp;
  }
  report.log_coefficient = sum / static_cast<double>(probes.size());
  report.coefficient = std::exp(report.log_coefficient);
  return report;
}

InstabilityReport instability_coefficient(const MapFn& map, const StateVec& z,
                                          std::size_t m_probes, double h, RngSeed seed,
                                          ProbeBasis basis) {
  const std::size_t n = z.size();
  if (m_probes == 0 || m_probes > n) throw InvalidArgument("probe count must lie in [1, n]");
  std::vector<StateVec> probes;
  if (basis == ProbeBasis::canonical) {
    for (std::size_t i = 0; i < m_probes; ++i) {
      StateVec e(n);
      e[i] = 1.0;
      probes.push_back(std::move(e));
    }
  } else {
    probes = random_orthonormal_probes(n, m_probes, seed);
  }
  return instability_coefficient_with_probes(map, z, probes, h);
}

InstabilityReport instability_coefficient(const FlowMap& map, const StateVec& z,
                                          std::size_t m_probes, double h, RngSeed seed,
                                          ProbeBasis basis) {
  return instability_coefficient(MapFn([&map](const StateVec& x) { return map(x); }), z,
                                 m_probes, h, seed, basis);
}

NormThresholdStats norm_threshold_stats(const std::vector<StateVec>& latents) {
  if (latents.empty()) throw InvalidArgument("norm_threshold_stats needs at least one latent");
  NormThresholdStats s;
  s.count = latents.size();
  s.dim = latents.front().size();
  s.threshold = high_density_threshold(s.dim);
  const double n = static_cast<double>(s.dim);
  std::size_t exceed = 0;
  std::vector<double> radial;
  radial.reserve(latents.size());
  for (const auto& z : latents) {
    if (z.size() != s.dim) throw InvalidArgument("norm_threshold_stats: mixed dimensions");
    const double sq = squared_norm(z);
    if (sq > s.threshold) ++exceed;
    radial.push_back(sq / n);
  }
  s.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(s.count);
  for (double r : radial) s.mean_radial += r;
  s.mean_radial /= static_cast<double>(s.count);
  if (s.count > 1) {
    for (double r : radial) s.var_radial += (r - s.mean_radial) * (r - s.mean_radial);
    s.var_radial /= static_cast<double>(s.count - 1);
  }
  return s;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

GaussianityReport gaussianity_report(const std::vector<StateVec>& latents) {
  if (latents.size() < 2) throw InvalidArgument("gaussianity_report needs at least two latents");
  GaussianityReport r;
  r.threshold = norm_threshold_stats(latents);
  const std::size_t n = r.threshold.dim;
  const double count = static_cast<double>(latents.size());
  r.coordinate_means.assign(n, 0.0);
  r.coordinate_variances.assign(n, 0.0);
  for (const auto& z : latents) {
    for (std::size_t i = 0; i < n; ++i) r.coordinate_means[i] += z[i];
  }
  for (double& m : r.coordinate_means) m /= count;
  for (const auto& z : latents) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = z[i] - r.coordinate_means[i];
      r.coordinate_variances[i] += d * d;
    }
  }
  for (double& v : r.coordinate_variances) v /= (count - 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.pooled_mean += r.coordinate_means[i];
    r.pooled_variance += r.coordinate_variances[i];
  }
  r.pooled_mean /= static_cast<double>(n);
  r.pooled_variance /= static_cast<double>(n);

  std::vector<double> radial;
  radial.reserve(latents.size());
  for (const auto& z : latents) radial.push_back(squared_norm(z) / static_cast<double>(n));
  std::sort(radial.begin(), radial.end());
  r.radial_quartiles = {quantile_sorted(radial, 0.25), quantile_sorted(radial, 0.5),
                        quantile_sorted(radial, 0.75)};
  return r;
}

}  // namespace pmiflow
