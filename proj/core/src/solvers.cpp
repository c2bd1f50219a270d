#include "pmiflow/solvers.hpp"

#include <string>

#include "pmiflow/errors.hpp"

namespace pmiflow {
namespace {

StateVec checked_eval(const VelocityField& field, const StateVec& z, double t) {
  StateVec v = field.velocity(z, t);
  if (!v.all_finite()) {
    throw NumericFailure("non-finite velocity at t = " + std::to_string(t));
  }
  return v;
}

void require_distinct(double a, double b) {
  if (a == b) throw InvalidArgument("solver step needs t_a != t_b");
}

}  // namespace

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::euler: return "euler";
    case SolverKind::heun: return "heun";
    case SolverKind::rf_solver: return "rf_solver";
    case SolverKind::fireflow: return "fireflow";
  }
  return "?";
}

SolverKind parse_solver_kind(std::string_view s) {
  if (s == "euler") return SolverKind::euler;
  if (s == "heun") return SolverKind::heun;
  if (s == "rf_solver" || s == "rf-solver") return SolverKind::rf_solver;
  if (s == "fireflow") return SolverKind::fireflow;
  throw InvalidArgument("unknown solver '" + std::string(s) + "'");
}

StepResult euler_invert_step(const VelocityField& field, const StateVec& z, double t_prev,
                             double t_cur) {
  if (!(t_cur > t_prev)) throw InvalidArgument("euler_invert_step needs t_cur > t_prev");
  StateVec v = checked_eval(field, z, t_prev);
  StateVec next = z;
  next.add_scaled(t_cur - t_prev, v);
  return {std::move(next), std::move(v)};
}

StepResult euler_sample_step(const VelocityField& field, const StateVec& z, double t_cur,
                             double t_next) {
  if (!(t_next < t_cur)) throw InvalidArgument("euler_sample_step needs t_next < t_cur");
  StateVec v = checked_eval(field, z, t_cur);
  StateVec next = z;
  next.add_scaled(t_next - t_cur, v);
  return {std::move(next), std::move(v)};
}

StepResult heun_step(const VelocityField& field, const StateVec& z, double t_a, double t_b) {
  require_distinct(t_a, t_b);
  const double h = t_b - t_a;
  StateVec v1 = checked_eval(field, z, t_a);
  StateVec predictor = z;
  predictor.add_scaled(h, v1);
  StateVec v2 = checked_eval(field, predictor, t_b);
  StateVec sum = v1 + v2;
  StateVec next = z;
  next.add_scaled(h / 2.0, sum);
  return {std::move(next), sum / 2.0};
}

StepResult rf_solver_step(const VelocityField& field, const StateVec& z, double t_a,
                          double t_b) {
  require_distinct(t_a, t_b);
  const double h = t_b - t_a;
  StateVec v1 = checked_eval(field, z, t_a);
  StateVec probe = z;
  probe.add_scaled(h, v1);
  StateVec dv = (checked_eval(field, probe, t_b) - v1) / h;
  StateVec next = z;
  next.add_scaled(h, v1).add_scaled(h * h / 2.0, dv);
  StateVec v_eff = v1;
  v_eff.add_scaled(h / 2.0, dv);
  return {std::move(next), std::move(v_eff)};
}

FireflowStepResult fireflow_step(const VelocityField& field, const StateVec& z, double t_a,
                                 double t_b, const std::optional<StateVec>& cached_mid) {
  require_distinct(t_a, t_b);
  const double h = t_b - t_a;
  const StateVec v1 = cached_mid ? *cached_mid : checked_eval(field, z, t_a);
  StateVec mid = z;
  mid.add_scaled(h / 2.0, v1);
  StateVec v_mid = checked_eval(field, mid, t_a + h / 2.0);
  StateVec next = z;
  next.add_scaled(h, v_mid);
  return {std::move(next), v_mid, v_mid};
}

StateVec VelocityEstimator::eval(const StateVec& z, double t) {
  ++nfe_;
  return checked_eval(*field_, z, t);
}

StateVec VelocityEstimator::estimate(const StateVec& z, double t_a, double t_b) {
  require_distinct(t_a, t_b);
  const double h = t_b - t_a;
  switch (kind_) {
    case SolverKind::euler:
      return eval(z, t_a);
    case SolverKind::heun: {
      StateVec v1 = eval(z, t_a);
      StateVec predictor = z;
      predictor.add_scaled(h, v1);
      return (v1 + eval(predictor, t_b)) / 2.0;
    }
    case SolverKind::rf_solver: {
      StateVec v1 = eval(z, t_a);
      StateVec probe = z;
      probe.add_scaled(h, v1);
      StateVec dv = (eval(probe, t_b) - v1) / h;
      return v1.add_scaled(h / 2.0, dv);
    }
    case SolverKind::fireflow: {
      StateVec v1 = cached_mid_ ? *cached_mid_ : eval(z, t_a);
      StateVec mid = z;
      mid.add_scaled(h / 2.0, v1);
      cached_mid_ = eval(mid, t_a + h / 2.0);
      return *cached_mid_;
    }
  }
  throw InvalidArgument("unknown solver kind");
}

Trajectory integrate(const VelocityField& field, const StateVec& start, const TimeGrid& grid,
                     SolverKind kind, Direction direction, VelocityCorrector* corrector) {
  if (start.size() != field.dim()) {
    throw InvalidArgument("integrate: state dimension does not match the field");
  }
  if (!start.all_finite()) throw InvalidArgument("integrate: start state is not finite");
  const std::size_t steps = grid.steps();
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.velocities_used.reserve(steps);

  auto time_at = [&](std::size_t k) {
    return direction == Direction::inversion ? grid[k] : grid[steps - k];
  };

  VelocityEstimator estimator(field, kind);
  StateVec z = start;
  traj.times.push_back(time_at(0));
  traj.states.push_back(z);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t_a = time_at(k);
    const double t_b = time_at(k + 1);
    try {
      StateVec v = estimator.estimate(z, t_a, t_b);
      if (corrector) {
        v = corrector->correct(k, v, t_a, t_b);
        if (!v.all_finite()) throw NumericFailure("correction produced a non-finite velocity");
      }
      z.add_scaled(t_b - t_a, v);
      if (!z.all_finite()) throw NumericFailure("state became non-finite");
      traj.velocities_used.push_back(std::move(v));
    } catch (const NumericFailure& e) {
      throw NumericFailure(e.what(), k);
    } catch (const SingularField& e) {
      throw NumericFailure(e.what(), k);
    }
    traj.times.push_back(t_b);
    traj.states.push_back(z);
  }
  traj.nfe = estimator.nfe();
  return traj;
}

Trajectory run_inversion(const VelocityField& field, const StateVec& z0, const TimeGrid& grid,
                         SolverKind kind) {
  return integrate(field, z0, grid, kind, Direction::inversion);
}

Trajectory run_sampling(const VelocityField& field, const StateVec& z1, const TimeGrid& grid,
                        SolverKind kind) {
  return integrate(field, z1, grid, kind, Direction::sampling);
}

std::size_t expected_nfe(SolverKind kind, std::size_t steps) {
  switch (kind) {
    case SolverKind::euler: return steps;
    case SolverKind::heun:
    case SolverKind::rf_solver: return 2 * steps;
    case SolverKind::fireflow: return steps + 1;
  }
  return 0;
}

}  // namespace pmiflow
