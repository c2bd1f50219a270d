#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmiflow/solvers.hpp"

namespace pmiflow::harness {

/// One trajectory's outcome. Metrics that the task does not compute stay empty.
struct RunRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::size_t batch_index = 0;
  /// Index of the sweep point (0 outside sweeps).
  std::size_t group = 0;
  std::string task;
  SolverKind solver = SolverKind::euler;
  std::size_t steps = 0;
  std::size_t nfe = 0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double w = 0.0;
  double noise_scale = 0.0;
  std::optional<double> rmse;
  std::optional<double> mse;
  std::optional<double> psnr_db;
  std::optional<double> instability_coeff;
  std::optional<double> exceed_fraction;
  std::optional<double> structure_metric;
  std::optional<double> fidelity_metric;
  /// Empty on success.
  std::string error;
  /// Free-form detail kept in the JSON record only (oracle check summaries).
  std::string note;

  bool failed() const noexcept { return !error.empty(); }
};

struct MetricAggregate {
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  /// Sample standard deviation, 0 for a single value.
  double stddev = 0.0;
};

/// Aggregate over all successful rows of one sweep point.
struct GroupAggregate {
  std::size_t group = 0;
  SolverKind solver = SolverKind::euler;
  std::size_t steps = 0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double w = 0.0;
  double noise_scale = 0.0;
  std::size_t rows = 0;
  std::size_t failures = 0;
  std::size_t nfe_total = 0;
  std::vector<MetricAggregate> metrics;
};

struct RunRecord {
  /// Canonical JSON of the resolved config.
  std::string config_json;
  std::string config_hash;
  std::string version;
  std::vector<RunRow> rows;
  std::vector<GroupAggregate> aggregates;
  std::size_t nfe_total = 0;
  std::size_t failures = 0;
  double wall_seconds = 0.0;
};

/// Recomputes the per-group aggregates from rows.
std::vector<GroupAggregate> aggregate_rows(const std::vector<RunRow>& rows);

}  // namespace pmiflow::harness
