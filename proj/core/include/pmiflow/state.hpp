#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pmiflow {

/// A point in the flow's state space, stored as a flat vector of doubles.
///
/// Construction from values rejects empty input and non-finite entries.
/// In-place arithmetic does not re-check; integrators call all_finite() on
/// every produced state and velocity before storing it.
class StateVec {
 public:
  explicit StateVec(std::size_t n, double fill = 0.0);
  explicit StateVec(std::vector<double> values);
  StateVec(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  bool all_finite() const noexcept;

  StateVec& operator+=(const StateVec& other);
  StateVec& operator-=(const StateVec& other);
  StateVec& operator*=(double s) noexcept;
  StateVec& operator/=(double s) noexcept;

  /// this += a * x
  StateVec& add_scaled(double a, const StateVec& x);

  friend bool operator==(const StateVec&, const StateVec&) = default;

 private:
  std::vector<double> values_;
};

StateVec operator+(StateVec a, const StateVec& b);
StateVec operator-(StateVec a, const StateVec& b);
StateVec operator*(double s, StateVec a);
StateVec operator*(StateVec a, double s);
StateVec operator/(StateVec a, double s);

double dot(const StateVec& a, const StateVec& b);
double squared_norm(const StateVec& a);

/// Euclidean norm, scaled internally so that entries near 1e300 do not
/// overflow the sum of squares.
double l2_norm(const StateVec& a);

double max_abs_diff(const StateVec& a, const StateVec& b);

/// Throws InvalidArgument unless a and b have the same dimension.
void require_same_dim(const StateVec& a, const StateVec& b, const char* what);

}  // namespace pmiflow
