#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "pmiflow/random.hpp"
#include "pmiflow/state.hpp"

namespace pmiflow {

/// Right-hand side v(z, t) of the flow ODE dz/dt = v. Implementations are
/// immutable and safe to evaluate concurrently.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual std::size_t dim() const noexcept = 0;
  virtual StateVec velocity(const StateVec& z, double t) const = 0;
};

using FieldPtr = std::shared_ptr<const VelocityField>;

/// v(z, t) = c everywhere.
class ConstantField final : public VelocityField {
 public:
  explicit ConstantField(StateVec c) : c_(std::move(c)) {}
  std::size_t dim() const noexcept override { return c_.size(); }
  StateVec velocity(const StateVec& z, double t) const override;

 private:
  StateVec c_;
};

/// Time-independent diagonal linear field v(z, t) = a ⊙ z.
class LinearField final : public VelocityField {
 public:
  explicit LinearField(StateVec rates) : rates_(std::move(rates)) {}
  std::size_t dim() const noexcept override { return rates_.size(); }
  StateVec velocity(const StateVec& z, double t) const override;

 private:
  StateVec rates_;
};

/// v(z, t) = a ⊙ z / (1 + a t). Its flow map from 0 to t is exactly
/// diag(1 + a t), and forward Euler reproduces that map to rounding on any
/// grid, since each step multiplies by (1 + a t_{i+1}) / (1 + a t_i).
/// Requires a > -1 so the map stays invertible on [0, 1].
class ScalingField final : public VelocityField {
 public:
  explicit ScalingField(StateVec rates);
  std::size_t dim() const noexcept override { return rates_.size(); }
  StateVec velocity(const StateVec& z, double t) const override;

 private:
  StateVec rates_;
};

/// Adapts an arbitrary callable; mostly for tests and oracles.
class FunctionField final : public VelocityField {
 public:
  using Fn = std::function<StateVec(const StateVec&, double)>;
  FunctionField(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  std::size_t dim() const noexcept override { return n_; }
  StateVec velocity(const StateVec& z, double t) const override { return fn_(z, t); }

 private:
  std::size_t n_;
  Fn fn_;
};

/// Diagonal Gaussian data component: weight π, mean μ, per-coordinate
/// variance σ². Variance entries may be zero (point mass along that axis).
struct GaussComponent {
  double weight;
  StateVec mean;
  StateVec var;
};

struct ConditionalMeans {
  StateVec zhat0;
  StateVec zhat1;
};

/// Marginal rectified-flow velocity for data ~ Σ π_k N(μ_k, diag σ_k²) and
/// noise ~ N(0, I), under z_t = (1 - t) z_0 + t z_1:
///   v(z, t) = E[z_1 - z_0 | z_t = z].
/// Component responsibilities are evaluated in the log domain.
class GmmField final : public VelocityField {
 public:
  explicit GmmField(std::vector<GaussComponent> components);

  static GmmField single(StateVec mean, StateVec var);

  std::size_t dim() const noexcept override { return n_; }
  const std::vector<GaussComponent>& components() const noexcept { return components_; }

  StateVec velocity(const StateVec& z, double t) const override;
  ConditionalMeans conditional_means(const StateVec& z, double t) const;
  std::vector<double> responsibilities(const StateVec& z, double t) const;

  /// log p_data(z) for the t = 0 mixture. Requires all variances > 0.
  double data_log_density(const StateVec& z) const;

  /// Draw one data point: component by weight, then μ + σ ⊙ ξ.
  StateVec sample_data(std::mt19937_64& engine) const;

  /// Same components with every mean shifted by delta along one coordinate.
  GmmField shifted(std::size_t coordinate, double delta) const;

 private:
  std::vector<GaussComponent> components_;
  std::size_t n_;
};

StateVec gmm_velocity(const GmmField& field, const StateVec& z, double t);
ConditionalMeans gmm_conditional_means(const GmmField& field, const StateVec& z, double t);

/// Exact flow map of the single-Gaussian field from t_from to t_to:
///   z(t_to) = (1 - t_to) μ + sqrt(s(t_to) / s(t_from)) ⊙ (z - (1 - t_from) μ),
/// where s(t) = (1 - t)² σ² + t². The field is affine in z for each
/// coordinate, so the map is affine as well.
StateVec linear_field_exact_map(const StateVec& mu, const StateVec& var,
                                const StateVec& z_start, double t_from, double t_to);

/// base(z, t) + noise_scale * g(z, t, seed), where g is a unit-variance
/// pseudo-random vector obtained by hashing z and t quantized to 1e-6.
class PerturbedField final : public VelocityField {
 public:
  static constexpr double kQuantum = 1e-6;

  PerturbedField(FieldPtr base, double noise_scale, RngSeed seed);

  std::size_t dim() const noexcept override { return base_->dim(); }
  StateVec velocity(const StateVec& z, double t) const override;

  /// The raw unit-variance direction g(z, t, seed).
  StateVec direction(const StateVec& z, double t) const;

  const FieldPtr& base() const noexcept { return base_; }
  double noise_scale() const noexcept { return noise_scale_; }

 private:
  FieldPtr base_;
  double noise_scale_;
  RngSeed seed_;
};

StateVec perturbed_velocity(const PerturbedField& field, const StateVec& z, double t);

}  // namespace pmiflow
