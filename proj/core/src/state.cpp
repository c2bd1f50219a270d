#include "pmiflow/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmiflow/errors.hpp"

namespace pmiflow {

StateVec::StateVec(std::size_t n, double fill) : values_(n, fill) {
  if (n == 0) throw InvalidArgument("StateVec dimension must be at least 1");
  if (!std::isfinite(fill)) throw InvalidArgument("StateVec entries must be finite");
}

StateVec::StateVec(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("StateVec dimension must be at least 1");
  if (!all_finite()) throw InvalidArgument("StateVec entries must be finite");
}

StateVec::StateVec(std::initializer_list<double> values)
    : StateVec(std::vector<double>(values)) {}

bool StateVec::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

StateVec& StateVec::operator+=(const StateVec& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

StateVec& StateVec::operator-=(const StateVec& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

StateVec& StateVec::operator*=(double s) noexcept {
  for (double& x : values_) x *= s;
  return *this;
}

StateVec& StateVec::operator/=(double s) noexcept {
  for (double& x : values_) x /= s;
  return *this;
}

StateVec& StateVec::add_scaled(double a, const StateVec& x) {
  require_same_dim(*this, x, "add_scaled");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

StateVec operator+(StateVec a, const StateVec& b) { return a += b; }
StateVec operator-(StateVec a, const StateVec& b) { return a -= b; }
StateVec operator*(double s, StateVec a) { return a *= s; }
StateVec operator*(StateVec a, double s) { return a *= s; }
StateVec operator/(StateVec a, double s) { return a /= s; }

double dot(const StateVec& a, const StateVec& b) {
  require_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(const StateVec& a) { return dot(a, a); }

double l2_norm(const StateVec& a) {
  double scale = 0.0;
  for (double x : a.values()) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double x : a.values()) {
    const double y = x / scale;
    acc += y * y;
  }
  return scale * std::sqrt(acc);
}

double max_abs_diff(const StateVec& a, const StateVec& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void require_same_dim(const StateVec& a, const StateVec& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                          ")");
  }
}

}  // namespace pmiflow
