#include "pmiflow/mimic_cfg.hpp"

#include <cmath>
#include <memory>

#include "pmiflow/errors.hpp"

namespace pmiflow {

RunningAverage edit_average_update(RunningAverage avg, const StateVec& v, double dt_signed) {
  if (!(dt_signed > 0.0)) {
    throw InvalidArgument("edit average weight t_{i-1} - t_i must be positive");
  }
  avg.update(v, dt_signed);
  return avg;
}

StateVec project_onto(const StateVec& v, const StateVec& v_bar, double tol) {
  require_same_dim(v, v_bar, "project_onto");
  const double denom = squared_norm(v_bar);
  if (denom < tol) return v;
  return (dot(v, v_bar) / denom) * v_bar;
}

StateVec mimic_cfg_correct(const StateVec& v, const StateVec& v_bar, double w, double tol,
                           InterpMode mode) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("w must lie in [0, 1]");
  require_same_dim(v, v_bar, "mimic_cfg_correct");
  if (squared_norm(v_bar) < tol) return v;
  StateVec target = mode == InterpMode::projection ? project_onto(v, v_bar, tol) : v_bar;
  target *= (1.0 - w);
  return target.add_scaled(w, v);
}

MimicCfgCorrector::MimicCfgCorrector(const CorrectionConfig& cfg)
    : cfg_(cfg), avg_(cfg.averaging, cfg.ema_alpha) {
  cfg_.validate();
}

StateVec MimicCfgCorrector::correct(std::size_t, const StateVec& raw, double t_a, double t_b) {
  const double dt = std::abs(t_b - t_a);
  // First step: the mean would be raw itself, so leave it bit-exact.
  StateVec corrected = raw;
  if (avg_.has_mean()) {
    const RunningAverage current = edit_average_update(avg_, raw, dt);
    corrected = mimic_cfg_correct(raw, current.mean(), cfg_.w, cfg_.projection_tol, cfg_.interp_mode);
  }
  const StateVec& tracked = cfg_.average_source == AverageSource::corrected ? corrected : raw;
  avg_ = edit_average_update(std::move(avg_), tracked, dt);
  return corrected;
}

Trajectory mimic_cfg_sample(const VelocityField& field, const StateVec& z1, const TimeGrid& grid,
                            SolverKind kind, const CorrectionConfig& cfg) {
  MimicCfgCorrector corrector(cfg);
  return integrate(field, z1, grid, kind, Direction::sampling, &corrector);
}

std::vector<std::size_t> agreeing_coordinates(const GmmField& a, const GmmField& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("agreeing_coordinates: dimension mismatch");
  std::vector<std::size_t> out;
  if (a.components().size() != b.components().size()) return out;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    bool same = true;
    for (std::size_t k = 0; k < a.components().size() && same; ++k) {
      const auto& ca = a.components()[k];
      const auto& cb = b.components()[k];
      same = ca.weight == cb.weight && ca.mean[i] == cb.mean[i] && ca.var[i] == cb.var[i];
    }
    if (same) out.push_back(i);
  }
  return out;
}

EditReport run_edit(const EditTask& task, const StateVec& z0) {
  if (task.source.dim() != task.target.dim()) {
    throw InvalidArgument("run_edit: source and target must share a dimension");
  }
  task.cfg.validate();
  FieldPtr source = std::make_shared<GmmField>(task.source);
  FieldPtr target = std::make_shared<GmmField>(task.target);
  if (task.noise_scale > 0.0) {
    source = std::make_shared<PerturbedField>(source, task.noise_scale, task.noise_seed);
    target = std::make_shared<PerturbedField>(target, task.noise_scale, task.noise_seed);
  }

  const Trajectory inv = task.use_pmi
                             ? pmi_invert(*source, z0, task.grid, task.solver, task.cfg)
                             : run_inversion(*source, z0, task.grid, task.solver);
  const StateVec& z1_hat = inv.final_state();

  auto sample = [&](const VelocityField& field) {
    return task.use_mimic_cfg ? mimic_cfg_sample(field, z1_hat, task.grid, task.solver, task.cfg)
                              : run_sampling(field, z1_hat, task.grid, task.solver);
  };
  const Trajectory edit = sample(*target);
  const Trajectory recon = sample(*source);

  EditReport report{z1_hat, recon.final_state(), edit.final_state(), 0.0, 0.0,
                    inv.nfe + edit.nfe + recon.nfe};
  double acc = 0.0;
  for (std::size_t i : agreeing_coordinates(task.source, task.target)) {
    const double d = report.z_edit[i] - z0[i];
    acc += d * d;
  }
  report.structure_metric = std::sqrt(acc);
  report.fidelity_metric = task.target.data_log_density(report.z_edit);
  return report;
}

}  // namespace pmiflow
