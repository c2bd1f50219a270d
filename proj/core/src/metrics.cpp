#include "pmiflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmiflow/errors.hpp"
#include "pmiflow/pmi.hpp"
#include "pmiflow/time_grid.hpp"

namespace pmiflow {

MetricRecord reconstruction_metrics(const StateVec& z_ref, const StateVec& z_out, double peak) {
  require_same_dim(z_ref, z_out, "reconstruction_metrics");
  if (!(peak > 0.0) || !std::isfinite(peak)) throw InvalidArgument("peak must be positive");
  MetricRecord m;
  m.peak = peak;
  double sum = 0.0;
  for (std::size_t i = 0; i < z_ref.size(); ++i) {
    const double d = z_out[i] - z_ref[i];
    sum += d * d;
    m.max_abs_err = std::max(m.max_abs_err, std::abs(d));
  }
  m.mse = sum / static_cast<double>(z_ref.size());
  m.rmse = std::sqrt(m.mse);
  m.psnr_db = m.mse > 0.0 ? 20.0 * std::log10(peak) - 10.0 * std::log10(m.mse)
                          : std::numeric_limits<double>::infinity();
  return m;
}

double default_peak(const StateVec& z_ref) {
  const auto vals = z_ref.values();
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  const double range = *hi - *lo;
  return range > 0.0 ? range : 1.0;
}

MetricRecord reconstruction_metrics(const StateVec& z_ref, const StateVec& z_out) {
  return reconstruction_metrics(z_ref, z_out, default_peak(z_ref));
}

std::vector<CurveRow> error_vs_steps_curve(const VelocityField& field, const StateVec& z0,
                                           SolverKind kind,
                                           const std::optional<CorrectionConfig>& cfg,
                                           const std::vector<std::size_t>& steps_list) {
  if (steps_list.empty()) throw InvalidArgument("error_vs_steps_curve needs at least one N");
  std::vector<CurveRow> rows;
  rows.reserve(steps_list.size());
  for (std::size_t steps : steps_list) {
    const TimeGrid grid = make_uniform_grid(steps);
    CurveRow row;
    row.steps = steps;
    const Trajectory inv = run_inversion(field, z0, grid, kind);
    const Trajectory rec = run_sampling(field, inv.final_state(), grid, kind);
    row.rmse = reconstruction_metrics(z0, rec.final_state(), 1.0).rmse;
    row.nfe = inv.nfe + rec.nfe;
    if (cfg) {
      const Trajectory pinv = pmi_invert(field, z0, grid, kind, *cfg);
      const Trajectory prec = pmi_sample(field, pinv.final_state(), grid, kind, *cfg);
      row.pmi_rmse = reconstruction_metrics(z0, prec.final_state(), 1.0).rmse;
      row.pmi_nfe = pinv.nfe + prec.nfe;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<LegErrorRow> exact_map_leg_errors(const GmmField& field, const StateVec& z0,
                                              SolverKind kind,
                                              const std::optional<CorrectionConfig>& cfg,
                                              const std::vector<std::size_t>& steps_list) {
  if (field.components().size() != 1) {
    throw InvalidArgument("exact_map_leg_errors needs a single-Gaussian field");
  }
  if (steps_list.empty()) throw InvalidArgument("exact_map_leg_errors needs at least one N");
  const auto& comp = field.components().front();
  const StateVec z1 = linear_field_exact_map(comp.mean, comp.var, z0, 0.0, 1.0);
  std::vector<LegErrorRow> rows;
  for (std::size_t steps : steps_list) {
    const TimeGrid grid = make_uniform_grid(steps);
    const Trajectory inv = cfg ? pmi_invert(field, z0, grid, kind, *cfg)
                               : run_inversion(field, z0, grid, kind);
    const Trajectory rec = cfg ? pmi_sample(field, z1, grid, kind, *cfg)
                               : run_sampling(field, z1, grid, kind);
    LegErrorRow row;
    row.steps = steps;
    row.inversion_rmse = reconstruction_metrics(z1, inv.final_state(), 1.0).rmse;
    row.reconstruction_rmse = reconstruction_metrics(z0, rec.final_state(), 1.0).rmse;
    row.nfe = inv.nfe + rec.nfe;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pmiflow
