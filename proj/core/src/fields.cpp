#include "pmiflow/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pmiflow/errors.hpp"

namespace pmiflow {
namespace {

void require_time_in_unit_interval(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("time must lie in [0, 1], got " + std::to_string(t));
  }
}

double spread(double var, double t) {
  const double u = 1.0 - t;
  return u * u * var + t * t;
}

}  // namespace

StateVec ConstantField::velocity(const StateVec& z, double) const {
  require_same_dim(z, c_, "ConstantField");
  return c_;
}

StateVec LinearField::velocity(const StateVec& z, double) const {
  require_same_dim(z, rates_, "LinearField");
  StateVec v = z;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= rates_[i];
  return v;
}

ScalingField::ScalingField(StateVec rates) : rates_(std::move(rates)) {
  for (double a : rates_.values()) {
    if (!(a > -1.0)) throw InvalidArgument("ScalingField rates must exceed -1");
  }
}

StateVec ScalingField::velocity(const StateVec& z, double t) const {
  require_same_dim(z, rates_, "ScalingField");
  StateVec v = z;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= rates_[i] / (1.0 + rates_[i] * t);
  return v;
}

GmmField::GmmField(std::vector<GaussComponent> components)
    : components_(std::move(components)), n_(0) {
  if (components_.empty()) throw InvalidArgument("GmmField needs at least one component");
  n_ = components_.front().mean.size();
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != n_ || c.var.size() != n_) {
      throw InvalidArgument("GmmField components must share one dimension");
    }
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw InvalidArgument("GmmField weights must lie in (0, 1]");
    }
    for (double v : c.var.values()) {
      if (!(v >= 0.0)) throw InvalidArgument("GmmField variances must be non-negative");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("GmmField weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

GmmField GmmField::single(StateVec mean, StateVec var) {
  return GmmField({GaussComponent{1.0, std::move(mean), std::move(var)}});
}

std::vector<double> GmmField::responsibilities(const StateVec& z, double t) const {
  require_time_in_unit_interval(t);
  if (z.size() != n_) throw InvalidArgument("GmmField: state dimension mismatch");
  const double u = 1.0 - t;
  std::vector<double> logw(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    double acc = std::log(c.weight);
    for (std::size_t i = 0; i < n_; ++i) {
      const double s = spread(c.var[i], t);
      if (!(s > 0.0)) {
        throw SingularField("GmmField: zero spread at t = " + std::to_string(t) +
                            " (component " + std::to_string(k) + ")");
      }
      const double d = z[i] - u * c.mean[i];
      acc -= 0.5 * (std::log(2.0 * std::numbers::pi * s) + d * d / s);
    }
    logw[k] = acc;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double sum = 0.0;
  for (double& lw : logw) {
    lw = std::exp(lw - top);
    sum += lw;
  }
  for (double& lw : logw) lw /= sum;
  return logw;
}

ConditionalMeans GmmField::conditional_means(const StateVec& z, double t) const {
  const auto resp = responsibilities(z, t);
  const double u = 1.0 - t;
  StateVec zhat0(n_), zhat1(n_);
  for (std::size_t k = 0; k < components_.size(); ++k) {
    if (resp[k] == 0.0) continue;
    const auto& c = components_[k];
    for (std::size_t i = 0; i < n_; ++i) {
      const double s = spread(c.var[i], t);
      const double d = z[i] - u * c.mean[i];
      zhat0[i] += resp[k] * (c.mean[i] + u * c.var[i] / s * d);
      zhat1[i] += resp[k] * (t / s * d);
    }
  }
  return {std::move(zhat0), std::move(zhat1)};
}

StateVec GmmField::velocity(const StateVec& z, double t) const {
  auto m = conditional_means(z, t);
  return m.zhat1 -= m.zhat0;
}

double GmmField::data_log_density(const StateVec& z) const {
  if (z.size() != n_) throw InvalidArgument("GmmField: state dimension mismatch");
  std::vector<double> logp(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    double acc = std::log(c.weight);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!(c.var[i] > 0.0)) {
        throw SingularField("data_log_density needs strictly positive variances");
      }
      const double d = z[i] - c.mean[i];
      acc -= 0.5 * (std::log(2.0 * std::numbers::pi * c.var[i]) + d * d / c.var[i]);
    }
    logp[k] = acc;
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double sum = 0.0;
  for (double lp : logp) sum += std::exp(lp - top);
  return top + std::log(sum);
}

StateVec GmmField::sample_data(std::mt19937_64& engine) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = unif(engine);
  std::size_t k = 0;
  double cum = components_[0].weight;
  while (u >= cum && k + 1 < components_.size()) cum += components_[++k].weight;
  const auto& c = components_[k];
  StateVec z(n_);
  for (std::size_t i = 0; i < n_; ++i) z[i] = c.mean[i] + std::sqrt(c.var[i]) * normal(engine);
  return z;
}

GmmField GmmField::shifted(std::size_t coordinate, double delta) const {
  if (coordinate >= n_) throw InvalidArgument("GmmField::shifted: coordinate out of range");
  auto comps = components_;
  for (auto& c : comps) c.mean[coordinate] += delta;
  return GmmField(std::move(comps));
}

StateVec gmm_velocity(const GmmField& field, const StateVec& z, double t) {
  return field.velocity(z, t);
}

ConditionalMeans gmm_conditional_means(const GmmField& field, const StateVec& z, double t) {
  return field.conditional_means(z, t);
}

StateVec linear_field_exact_map(const StateVec& mu, const StateVec& var,
                                const StateVec& z_start, double t_from, double t_to) {
  require_same_dim(mu, var, "linear_field_exact_map");
  require_same_dim(mu, z_start, "linear_field_exact_map");
  require_time_in_unit_interval(t_from);
  require_time_in_unit_interval(t_to);
  if (t_from == t_to) return z_start;
  StateVec out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s_from = spread(var[i], t_from);
    const double s_to = spread(var[i], t_to);
    if (!(s_from > 0.0) || !(s_to > 0.0)) {
      throw SingularField("linear_field_exact_map: zero spread at an endpoint");
    }
    out[i] = (1.0 - t_to) * mu[i] +
             std::sqrt(s_to / s_from) * (z_start[i] - (1.0 - t_from) * mu[i]);
  }
  if (!out.all_finite()) throw OracleFailure("linear_field_exact_map produced a non-finite state");
  return out;
}

PerturbedField::PerturbedField(FieldPtr base, double noise_scale, RngSeed seed)
    : base_(std::move(base)), noise_scale_(noise_scale), seed_(seed) {
  if (!base_) throw InvalidArgument("PerturbedField needs a base field");
  if (!(noise_scale_ >= 0.0) || !std::isfinite(noise_scale_)) {
    throw InvalidArgument("noise_scale must be non-negative");
  }
}

StateVec PerturbedField::direction(const StateVec& z, double t) const {
  auto quantize = [](double x) -> std::uint64_t {
    const double q = std::round(x / kQuantum);
    if (std::abs(q) < 9.0e18) return static_cast<std::uint64_t>(static_cast<std::int64_t>(q));
    return std::bit_cast<std::uint64_t>(q);
  };
  std::uint64_t h = mix64(seed_.value ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ quantize(t));
  for (double x : z.values()) h = mix64(h ^ quantize(x));
  StateVec g(z.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = hashed_normal(h ^ mix64(static_cast<std::uint64_t>(i) + 1));
  }
  return g;
}

StateVec PerturbedField::velocity(const StateVec& z, double t) const {
  StateVec v = base_->velocity(z, t);
  if (noise_scale_ == 0.0) return v;
  return v.add_scaled(noise_scale_, direction(z, t));
}

StateVec perturbed_velocity(const PerturbedField& field, const StateVec& z, double t) {
  return field.velocity(z, t);
}

}  // namespace pmiflow
