#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "pmiflow/fields.hpp"
#include "pmiflow/random.hpp"
#include "pmiflow/solvers.hpp"
#include "pmiflow/state.hpp"
#include "pmiflow/time_grid.hpp"

namespace pmiflow {

enum class FlowDirection { noise_to_data, data_to_noise };

/// End-to-end solution operator of a discretized flow.
struct FlowMap {
  FieldPtr field;
  TimeGrid grid;
  SolverKind kind = SolverKind::euler;
  FlowDirection direction = FlowDirection::noise_to_data;

  StateVec operator()(const StateVec& z) const;
};

using MapFn = std::function<StateVec(const StateVec&)>;

enum class ProbeBasis { random_orthonormal, canonical };

struct InstabilityReport {
  double coefficient = 1.0;
  double log_coefficient = 0.0;
  std::size_t probes = 0;
  std::size_t dim = 0;
  double probe_step = 0.0;
  std::vector<double> per_probe_log_amps;
  /// True when probes < dim, i.e. the coefficient is a subsampled estimate.
  bool subsampled = false;
};

/// m orthonormal vectors from modified Gram-Schmidt (two passes) on a
/// seeded Gaussian n x m matrix.
std::vector<StateVec> random_orthonormal_probes(std::size_t n, std::size_t m, RngSeed seed);

/// Geometric mean of ‖J u_i‖ / ‖u_i‖ over the probes, with J u estimated by
/// the forward difference (F(z + h u) - F(z)) / h. Accumulated in the log
/// domain.
InstabilityReport instability_coefficient_with_probes(const MapFn& map, const StateVec& z,
                                                      const std::vector<StateVec>& probes,
                                                      double h);

InstabilityReport instability_coefficient(const MapFn& map, const StateVec& z,
                                          std::size_t m_probes, double h, RngSeed seed,
                                          ProbeBasis basis = ProbeBasis::random_orthonormal);

InstabilityReport instability_coefficient(const FlowMap& map, const StateVec& z,
                                          std::size_t m_probes, double h, RngSeed seed,
                                          ProbeBasis basis = ProbeBasis::random_orthonormal);

struct NormThresholdStats {
  std::size_t count = 0;
  std::size_t dim = 0;
  /// 2n + 3 sqrt(2n)
  double threshold = 0.0;
  /// Fraction of latents with ‖z‖² above the threshold.
  double exceed_fraction = 0.0;
  /// Mean and sample variance of ‖z‖² / n.
  double mean_radial = 0.0;
  double var_radial = 0.0;
};

NormThresholdStats norm_threshold_stats(const std::vector<StateVec>& latents);

struct GaussianityReport {
  std::vector<double> coordinate_means;
  std::vector<double> coordinate_variances;
  double pooled_mean = 0.0;
  double pooled_variance = 0.0;
  /// Quartiles (25 / 50 / 75 %) of ‖z‖² / n.
  std::array<double, 3> radial_quartiles{};
  NormThresholdStats threshold;
};

/// Needs at least two latents.
GaussianityReport gaussianity_report(const std::vector<StateVec>& latents);

}  // namespace pmiflow
