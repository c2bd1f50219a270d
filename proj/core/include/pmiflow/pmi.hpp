#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pmiflow/correction_config.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/random.hpp"
#include "pmiflow/solvers.hpp"
#include "pmiflow/state.hpp"
#include "pmiflow/time_grid.hpp"

namespace pmiflow {

/// λ used for reconstruction runs unless configured otherwise.
inline constexpr double kReconstructionLambda = 10.0;

/// Per-solver λ for editing runs: Euler 8, Heun / RF-Solver / FireFlow 1.
double editing_lambda(SolverKind kind);

/// Squared-norm radius of the high-density shell of N(0, I_n): 2n + 3 sqrt(2n).
double high_density_threshold(std::size_t n);

/// Time-weighted running mean of interval velocities.
///
/// integral: accumulated = Σ dt·v, total_weight = Σ dt, mean = accumulated / total_weight.
/// ema:      accumulated ← α (dt·v) + (1 - α) accumulated, initialized to dt·v.
///           The weights follow the same recursion, and mean() divides by
///           them so that a constant velocity has itself as mean.
class RunningAverage {
 public:
  explicit RunningAverage(AveragingScheme scheme = AveragingScheme::integral,
                          double ema_alpha = 0.9);

  /// Throws InvalidArgument for weight <= 0.
  void update(const StateVec& v, double weight);

  bool has_mean() const noexcept { return accumulated_.has_value(); }
  StateVec mean() const;

  AveragingScheme scheme() const noexcept { return scheme_; }
  double ema_alpha() const noexcept { return ema_alpha_; }
  const std::optional<StateVec>& accumulated() const noexcept { return accumulated_; }
  double total_weight() const noexcept { return total_weight_; }
  std::size_t step_index() const noexcept { return step_index_; }

  const std::optional<StateVec>& last_velocity() const noexcept { return last_velocity_; }
  void set_last_velocity(StateVec v) { last_velocity_ = std::move(v); }

 private:
  AveragingScheme scheme_;
  double ema_alpha_;
  std::optional<StateVec> accumulated_;
  double total_weight_ = 0.0;
  std::size_t step_index_ = 0;
  std::optional<StateVec> last_velocity_;
};

RunningAverage running_average_update(RunningAverage avg, const StateVec& v, double dt);

struct RadiusSchedule {
  std::size_t n = 1;
  double total_time = 1.0;
  double epsilon = 2.0;
};

/// sqrt(2n + 3 sqrt(2n)) * dt / T + ε
double stability_radius(const RadiusSchedule& sched, double dt);

/// Gradient of F(v) = ‖v - v_prev‖_p + (1 / 2λ) ‖v - v̄‖².
/// L1 uses sign() with sign(0) = 0; L2 uses (v - v_prev) / ‖v - v_prev‖, or
/// zero when that norm is below grad_tol. The anchor term is dropped when
/// v_prev is absent or norm is none.
StateVec prox_gradient(const StateVec& v, const std::optional<StateVec>& v_prev,
                       const StateVec& v_bar, double lambda, NormChoice norm,
                       double grad_tol = 1e-12);

/// v - r ∇F / ‖∇F‖, or v when ‖∇F‖ < grad_tol. Without a mean in avg the
/// current velocity serves as its own mean.
StateVec pmi_correct(const StateVec& v, const RunningAverage& avg, double r,
                     const CorrectionConfig& cfg);

/// Applies the proximal-mean correction to every interval of a traversal.
/// The mean for interval k includes the current raw velocity with weight
/// Δt_k; afterwards the average absorbs the tracked velocity (corrected or
/// raw, per cfg.average_source), which also becomes the next L1 anchor.
class PmiCorrector final : public VelocityCorrector {
 public:
  PmiCorrector(std::size_t n, double total_time, const CorrectionConfig& cfg);

  StateVec correct(std::size_t step, const StateVec& raw, double t_a, double t_b) override;

  const RunningAverage& average() const noexcept { return avg_; }
  RunningAverage& average() noexcept { return avg_; }
  const RadiusSchedule& schedule() const noexcept { return sched_; }

 private:
  CorrectionConfig cfg_;
  RadiusSchedule sched_;
  RunningAverage avg_;
};

Trajectory pmi_invert(const VelocityField& field, const StateVec& z0, const TimeGrid& grid,
                      SolverKind kind, const CorrectionConfig& cfg);

/// Reverse traversal with the same correction, used for reconstruction.
Trajectory pmi_sample(const VelocityField& field, const StateVec& z1, const TimeGrid& grid,
                      SolverKind kind, const CorrectionConfig& cfg);

enum class OracleStatus { passed, violated, degenerate };

struct ProxOracleReport {
  OracleStatus status = OracleStatus::degenerate;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double closed_form_value = 0.0;
  double best_sampled_value = 0.0;
  /// Sampled direction with the largest margin below the closed form, if any.
  std::optional<StateVec> worst_direction;
  /// Argmin over {closed form} ∪ samples agrees between the first-order and
  /// the second-order (Hessian I/λ) objectives.
  bool second_order_argmin_agrees = true;
  /// Positions where the two objectives' full rankings differ.
  std::size_t rank_mismatches = 0;
};

/// Brute-force check that d* = -∇F / ‖∇F‖ minimizes r ∇F·d over the unit sphere.
/// trials >= 100.
ProxOracleReport prox_oracle_check(const StateVec& v, const std::optional<StateVec>& v_prev,
                                   const StateVec& v_bar, double lambda, double r,
                                   std::size_t trials, RngSeed seed,
                                   NormChoice norm = NormChoice::l1);

struct LocalErrorReport {
  std::vector<double> h_values;
  std::vector<double> corrected_errors;
  std::vector<double> plain_errors;
  double corrected_slope = 0.0;
  double plain_slope = 0.0;
  /// max over h of error / h²
  double corrected_constant = 0.0;
  double plain_constant = 0.0;
  /// sqrt(2n + 3 sqrt(2n)) / T
  double radius_constant = 0.0;
};

/// One-step error of the corrected and uncorrected solver against the exact
/// single-Gaussian map, starting from (z0, t_start) over [t_start, t_start + h].
/// The running average is warmed with exact-trajectory velocities on a
/// spacing-h grid ending at t_start, so the correction is active. The radius
/// uses ε = 0, making it proportional to h.
LocalErrorReport local_error_order_check(const GmmField& field, const StateVec& z0,
                                         SolverKind kind, const CorrectionConfig& cfg,
                                         const std::vector<double>& h_values,
                                         double t_start = 0.3);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pmiflow
