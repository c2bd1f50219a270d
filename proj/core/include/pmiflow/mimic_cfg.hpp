#pragma once

#include <cstddef>
#include <vector>

#include "pmiflow/correction_config.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/pmi.hpp"
#include "pmiflow/solvers.hpp"
#include "pmiflow/state.hpp"
#include "pmiflow/time_grid.hpp"

namespace pmiflow {

/// Running-average update for a reverse traversal; dt_signed = t_{i-1} - t_i
/// must be positive.
RunningAverage edit_average_update(RunningAverage avg, const StateVec& v, double dt_signed);

/// (vᵀv̄ / ‖v̄‖²) v̄, or v itself when ‖v̄‖² < tol.
StateVec project_onto(const StateVec& v, const StateVec& v_bar, double tol = 1e-12);

/// (1 - w) · target + w · v, where target is the projection of v onto v̄
/// (projection mode) or v̄ itself (direct mode). A degenerate v̄ leaves v
/// unchanged in either mode.
StateVec mimic_cfg_correct(const StateVec& v, const StateVec& v_bar, double w,
                           double tol = 1e-12, InterpMode mode = InterpMode::projection);

/// Edit-phase corrector. As with PmiCorrector the mean for the current
/// interval already includes the current raw velocity, so the first step is
/// left unchanged.
class MimicCfgCorrector final : public VelocityCorrector {
 public:
  explicit MimicCfgCorrector(const CorrectionConfig& cfg);
  StateVec correct(std::size_t step, const StateVec& raw, double t_a, double t_b) override;

 private:
  CorrectionConfig cfg_;
  RunningAverage avg_;
};

Trajectory mimic_cfg_sample(const VelocityField& field, const StateVec& z1, const TimeGrid& grid,
                            SolverKind kind, const CorrectionConfig& cfg);

/// Desk-scale editing: invert a data point under the source mixture, then
/// sample under the target mixture (edit) and the source mixture
/// (reconstruction).
struct EditTask {
  GmmField source;
  GmmField target;
  TimeGrid grid;
  SolverKind solver = SolverKind::euler;
  CorrectionConfig cfg;
  bool use_pmi = true;
  bool use_mimic_cfg = true;
  /// Both fields are wrapped in PerturbedField when positive.
  double noise_scale = 0.0;
  RngSeed noise_seed{};
};

struct EditReport {
  StateVec z1_hat;
  StateVec z_recon;
  StateVec z_edit;
  /// Analog structure distance: ‖z_edit - z0‖ over coordinates on which the
  /// source and target mixtures agree.
  double structure_metric = 0.0;
  /// Analog edit fidelity: log p_target(z_edit) under the target data mixture.
  double fidelity_metric = 0.0;
  std::size_t nfe = 0;
};

/// Coordinates where every component has identical mean and variance in both
/// mixtures (components matched by index).
std::vector<std::size_t> agreeing_coordinates(const GmmField& a, const GmmField& b);

EditReport run_edit(const EditTask& task, const StateVec& z0);

}  // namespace pmiflow
