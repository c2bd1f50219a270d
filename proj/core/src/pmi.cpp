#include "pmiflow/pmi.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>

#include "pmiflow/errors.hpp"

namespace pmiflow {

double editing_lambda(SolverKind kind) { return kind == SolverKind::euler ? 8.0 : 1.0; }

double high_density_threshold(std::size_t n) {
  const double two_n = 2.0 * static_cast<double>(n);
  return two_n + 3.0 * std::sqrt(two_n);
}

RunningAverage::RunningAverage(AveragingScheme scheme, double ema_alpha)
    : scheme_(scheme), ema_alpha_(ema_alpha) {
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) {
    throw InvalidArgument("ema_alpha must lie in (0, 1]");
  }
}

void RunningAverage::update(const StateVec& v, double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw InvalidArgument("running average weight must be positive");
  }
  if (!accumulated_) {
    accumulated_ = weight * v;
    total_weight_ = weight;
  } else if (scheme_ == AveragingScheme::integral) {
    accumulated_->add_scaled(weight, v);
    total_weight_ += weight;
  } else {
    *accumulated_ *= (1.0 - ema_alpha_);
    accumulated_->add_scaled(ema_alpha_ * weight, v);
    total_weight_ = ema_alpha_ * weight + (1.0 - ema_alpha_) * total_weight_;
  }
  ++step_index_;
}

StateVec RunningAverage::mean() const {
  if (!accumulated_) throw InvalidArgument("running average has no samples yet");
  return *accumulated_ / total_weight_;
}

RunningAverage running_average_update(RunningAverage avg, const StateVec& v, double dt) {
  avg.update(v, dt);
  return avg;
}

double stability_radius(const RadiusSchedule& sched, double dt) {
  if (sched.n == 0) throw InvalidArgument("stability_radius: n must be >= 1");
  if (!(sched.total_time > 0.0)) throw InvalidArgument("stability_radius: T must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("stability_radius: dt must be positive");
  return std::sqrt(high_density_threshold(sched.n)) * dt / sched.total_time + sched.epsilon;
}

StateVec prox_gradient(const StateVec& v, const std::optional<StateVec>& v_prev,
                       const StateVec& v_bar, double lambda, NormChoice norm,
                       double grad_tol) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  require_same_dim(v, v_bar, "prox_gradient");
  StateVec g = (v - v_bar) / lambda;
  if (!v_prev || norm == NormChoice::none) return g;
  require_same_dim(v, *v_prev, "prox_gradient");
  if (norm == NormChoice::l1) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - (*v_prev)[i];
      g[i] += static_cast<double>((d > 0.0) - (d < 0.0));
    }
  } else {
    StateVec d = v - *v_prev;
    const double len = l2_norm(d);
    if (len >= grad_tol) g.add_scaled(1.0 / len, d);
  }
  return g;
}

StateVec pmi_correct(const StateVec& v, const RunningAverage& avg, double r,
                     const CorrectionConfig& cfg) {
  if (!(r > 0.0)) throw InvalidArgument("pmi_correct: radius must be positive");
  const StateVec v_bar = avg.has_mean() ? avg.mean() : v;
  const StateVec g =
      prox_gradient(v, avg.last_velocity(), v_bar, cfg.lambda, cfg.norm_choice, cfg.grad_tol);
  const double len = l2_norm(g);
  if (len < cfg.grad_tol) return v;
  StateVec out = v;
  out.add_scaled(-r / len, g);
  return out;
}

PmiCorrector::PmiCorrector(std::size_t n, double total_time, const CorrectionConfig& cfg)
    : cfg_(cfg), sched_{n, total_time, cfg.epsilon}, avg_(cfg.averaging, cfg.ema_alpha) {
  cfg_.validate();
}

StateVec PmiCorrector::correct(std::size_t, const StateVec& raw, double t_a, double t_b) {
  const double dt = std::abs(t_b - t_a);
  const double r = stability_radius(sched_, dt);
  RunningAverage current = avg_;
  current.update(raw, dt);
  StateVec corrected = pmi_correct(raw, current, r, cfg_);
  const StateVec& tracked = cfg_.average_source == AverageSource::corrected ? corrected : raw;
  avg_.update(tracked, dt);
  avg_.set_last_velocity(tracked);
  return corrected;
}

Trajectory pmi_invert(const VelocityField& field, const StateVec& z0, const TimeGrid& grid,
                      SolverKind kind, const CorrectionConfig& cfg) {
  PmiCorrector corrector(field.dim(), grid.total_time(), cfg);
  return integrate(field, z0, grid, kind, Direction::inversion, &corrector);
}

Trajectory pmi_sample(const VelocityField& field, const StateVec& z1, const TimeGrid& grid,
                      SolverKind kind, const CorrectionConfig& cfg) {
  PmiCorrector corrector(field.dim(), grid.total_time(), cfg);
  return integrate(field, z1, grid, kind, Direction::sampling, &corrector);
}

ProxOracleReport prox_oracle_check(const StateVec& v, const std::optional<StateVec>& v_prev,
                                   const StateVec& v_bar, double lambda, double r,
                                   std::size_t trials, RngSeed seed, NormChoice norm) {
  if (trials < 100) throw InvalidArgument("prox_oracle_check needs at least 100 trials");
  if (!(r > 0.0)) throw InvalidArgument("prox_oracle_check: radius must be positive");
  ProxOracleReport report;
  report.trials = trials;
  const StateVec g = prox_gradient(v, v_prev, v_bar, lambda, norm);
  const double g_len = l2_norm(g);
  if (g_len == 0.0) {
    report.status = OracleStatus::degenerate;
    return report;
  }
  const std::size_t n = v.size();
  const StateVec d_star = (-1.0 / g_len) * g;

  auto first_order = [&](const StateVec& d) { return r * dot(g, d); };
  auto second_order = [&](const StateVec& d) {
    return r * dot(g, d) + r * r * squared_norm(d) / (2.0 * lambda);
  };

  // Index 0 is the closed form; 1..trials are sampled directions.
  std::vector<double> f1(trials + 1), f2(trials + 1);
  f1[0] = first_order(d_star);
  f2[0] = second_order(d_star);
  report.closed_form_value = f1[0];
  report.best_sampled_value = std::numeric_limits<double>::infinity();

  const double tol = 1e-12 * std::max(1.0, std::abs(f1[0]));
  double worst_margin = 0.0;
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 1; k <= trials; ++k) {
    StateVec d(n);
    double len = 0.0;
    do {
      for (std::size_t i = 0; i < n; ++i) d[i] = normal(engine);
      len = l2_norm(d);
    } while (len == 0.0);
    d /= len;
    f1[k] = first_order(d);
    f2[k] = second_order(d);
    report.best_sampled_value = std::min(report.best_sampled_value, f1[k]);
    const double margin = f1[0] - f1[k];
    if (margin > tol) {
      ++report.violations;
      if (margin > worst_margin) {
        worst_margin = margin;
        report.worst_direction = d;
      }
    }
  }
  report.status = report.violations == 0 ? OracleStatus::passed : OracleStatus::violated;

  std::vector<std::size_t> order1(trials + 1), order2(trials + 1);
  std::iota(order1.begin(), order1.end(), 0);
  std::iota(order2.begin(), order2.end(), 0);
  std::stable_sort(order1.begin(), order1.end(),
                   [&](std::size_t a, std::size_t b) { return f1[a] < f1[b]; });
  std::stable_sort(order2.begin(), order2.end(),
                   [&](std::size_t a, std::size_t b) { return f2[a] < f2[b]; });
  // Directions whose first-order values tie within tol count as the same
  // minimizer, e.g. in n = 1 where samples reproduce ±d* exactly.
  report.second_order_argmin_agrees =
      order1.front() == order2.front() || std::abs(f1[order2.front()] - f1[order1.front()]) <= tol;
  for (std::size_t i = 0; i < order1.size(); ++i) {
    if (order1[i] != order2[i]) ++report.rank_mismatches;
  }
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("loglog_slope needs two equally sized series of length >= 2");
  }
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_slope needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

LocalErrorReport local_error_order_check(const GmmField& field, const StateVec& z0,
                                         SolverKind kind, const CorrectionConfig& cfg,
                                         const std::vector<double>& h_values, double t_start) {
  if (field.components().size() != 1) {
    throw InvalidArgument("local_error_order_check needs a single-Gaussian field");
  }
  if (h_values.size() < 2) throw InvalidArgument("local_error_order_check needs >= 2 step sizes");
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    if (!(h_values[i] > 0.0 && h_values[i] <= 0.1)) {
      throw InvalidArgument("step sizes must lie in (0, 0.1]");
    }
    if (i > 0 && !(h_values[i] < h_values[i - 1])) {
      throw InvalidArgument("step sizes must be decreasing");
    }
  }
  const auto& comp = field.components().front();
  CorrectionConfig diag = cfg;
  diag.epsilon = 0.0;
  diag.validate();
  const double total_time = 1.0;

  LocalErrorReport report;
  report.h_values = h_values;
  report.radius_constant = std::sqrt(high_density_threshold(field.dim())) / total_time;

  for (double h : h_values) {
    const double t_end = t_start + h;
    const StateVec exact = linear_field_exact_map(comp.mean, comp.var, z0, t_start, t_end);

    PmiCorrector corrector(field.dim(), total_time, diag);
    const auto history = static_cast<std::size_t>(std::floor(t_start / h + 1e-9));
    for (std::size_t j = history; j >= 1; --j) {
      const double t_j = std::max(0.0, t_start - static_cast<double>(j) * h);
      const StateVec z_j = linear_field_exact_map(comp.mean, comp.var, z0, t_start, t_j);
      const StateVec v_j = field.velocity(z_j, t_j);
      corrector.average().update(v_j, h);
      corrector.average().set_last_velocity(v_j);
    }

    VelocityEstimator plain_est(field, kind);
    StateVec plain = z0;
    plain.add_scaled(h, plain_est.estimate(z0, t_start, t_end));

    VelocityEstimator corr_est(field, kind);
    const StateVec raw = corr_est.estimate(z0, t_start, t_end);
    StateVec corrected = z0;
    corrected.add_scaled(h, corrector.correct(0, raw, t_start, t_end));

    const double e_plain = l2_norm(plain - exact);
    const double e_corr = l2_norm(corrected - exact);
    report.plain_errors.push_back(e_plain);
    report.corrected_errors.push_back(e_corr);
    report.plain_constant = std::max(report.plain_constant, e_plain / (h * h));
    report.corrected_constant = std::max(report.corrected_constant, e_corr / (h * h));
  }
  report.plain_slope = loglog_slope(report.h_values, report.plain_errors);
  report.corrected_slope = loglog_slope(report.h_values, report.corrected_errors);
  return report;
}

}  // namespace pmiflow
