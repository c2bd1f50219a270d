#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pmiflow/correction_config.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/solvers.hpp"
#include "pmiflow/state.hpp"

namespace pmiflow {

struct MetricRecord {
  double rmse = 0.0;
  double mse = 0.0;
  /// +inf when mse == 0.
  double psnr_db = 0.0;
  double max_abs_err = 0.0;
  double peak = 1.0;
};

/// peak must be positive.
MetricRecord reconstruction_metrics(const StateVec& z_ref, const StateVec& z_out, double peak);

/// Uses the empirical range of z_ref as the peak, or 1 when z_ref is constant.
MetricRecord reconstruction_metrics(const StateVec& z_ref, const StateVec& z_out);

double default_peak(const StateVec& z_ref);

struct CurveRow {
  std::size_t steps = 0;
  double rmse = 0.0;
  std::size_t nfe = 0;
  std::optional<double> pmi_rmse;
  std::optional<std::size_t> pmi_nfe;
};

/// Round-trip error z0 -> ẑ1 -> ẑ0 on uniform grids with the given step counts.
/// With a config, the corrected round trip fills the pmi columns.
std::vector<CurveRow> error_vs_steps_curve(const VelocityField& field, const StateVec& z0,
                                           SolverKind kind,
                                           const std::optional<CorrectionConfig>& cfg,
                                           const std::vector<std::size_t>& steps_list);

struct LegErrorRow {
  std::size_t steps = 0;
  /// RMSE of the inverted latent against the exact map of z0.
  double inversion_rmse = 0.0;
  /// RMSE of the reconstruction, started from the exact latent, against z0.
  double reconstruction_rmse = 0.0;
  std::size_t nfe = 0;
};

/// Per-leg global errors against the closed-form single-Gaussian flow map.
/// Measuring legs separately matters for symmetric second-order schemes,
/// whose leading errors cancel over a full round trip.
std::vector<LegErrorRow> exact_map_leg_errors(const GmmField& field, const StateVec& z0,
                                              SolverKind kind,
                                              const std::optional<CorrectionConfig>& cfg,
                                              const std::vector<std::size_t>& steps_list);

}  // namespace pmiflow
