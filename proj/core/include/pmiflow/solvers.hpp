#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "pmiflow/fields.hpp"
#include "pmiflow/state.hpp"
#include "pmiflow/time_grid.hpp"

namespace pmiflow {

enum class SolverKind { euler, heun, rf_solver, fireflow };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view s);

/// inversion walks t_0 -> t_N (data to noise); sampling walks t_N -> t_0.
enum class Direction { inversion, sampling };

struct StepResult {
  StateVec state;
  StateVec velocity;
};

struct FireflowStepResult {
  StateVec state;
  StateVec velocity;
  StateVec cached_mid;
};

StepResult euler_invert_step(const VelocityField& field, const StateVec& z, double t_prev,
                             double t_cur);
StepResult euler_sample_step(const VelocityField& field, const StateVec& z, double t_cur,
                             double t_next);

/// Predictor-corrector; the returned velocity is (v1 + v2) / 2.
StepResult heun_step(const VelocityField& field, const StateVec& z, double t_a, double t_b);

/// Second-order Taylor step with a forward-difference time derivative.
/// Algebraically identical to heun_step.
StepResult rf_solver_step(const VelocityField& field, const StateVec& z, double t_a,
                          double t_b);

/// Midpoint step that reuses the previous step's midpoint velocity as its
/// starting slope, costing one evaluation per step after the first.
FireflowStepResult fireflow_step(const VelocityField& field, const StateVec& z, double t_a,
                                 double t_b, const std::optional<StateVec>& cached_mid);

/// States in traversal order: states.front() is the starting point and
/// states.back() the end point (t_N for inversion, t_0 for sampling).
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVec> states;
  std::vector<StateVec> velocities_used;
  std::size_t nfe = 0;

  const StateVec& final_state() const { return states.back(); }
};

/// Produces a solver's effective velocity over one interval. Holds the
/// FireFlow midpoint cache and counts field evaluations.
class VelocityEstimator {
 public:
  VelocityEstimator(const VelocityField& field, SolverKind kind)
      : field_(&field), kind_(kind) {}

  StateVec estimate(const StateVec& z, double t_a, double t_b);
  std::size_t nfe() const noexcept { return nfe_; }
  SolverKind kind() const noexcept { return kind_; }

 private:
  StateVec eval(const StateVec& z, double t);

  const VelocityField* field_;
  SolverKind kind_;
  std::size_t nfe_ = 0;
  std::optional<StateVec> cached_mid_;
};

/// Optional per-step hook that replaces the raw interval velocity before the
/// state advances by (t_b - t_a) * velocity.
class VelocityCorrector {
 public:
  virtual ~VelocityCorrector() = default;
  virtual StateVec correct(std::size_t step, const StateVec& raw, double t_a, double t_b) = 0;
};

/// Drives one trajectory over the grid. Any NumericFailure or field error is
/// rethrown as NumericFailure carrying the traversal step index.
Trajectory integrate(const VelocityField& field, const StateVec& start, const TimeGrid& grid,
                     SolverKind kind, Direction direction,
                     VelocityCorrector* corrector = nullptr);

Trajectory run_inversion(const VelocityField& field, const StateVec& z0, const TimeGrid& grid,
                         SolverKind kind);
Trajectory run_sampling(const VelocityField& field, const StateVec& z1, const TimeGrid& grid,
                        SolverKind kind);

/// Field evaluations a solver spends on N intervals.
std::size_t expected_nfe(SolverKind kind, std::size_t steps);

}  // namespace pmiflow
