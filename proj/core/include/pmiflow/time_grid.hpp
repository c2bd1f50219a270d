#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pmiflow {

/// Strictly increasing timesteps 0 = t_0 < t_1 < ... < t_N = T, N >= 1.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// Number of intervals N.
  std::size_t steps() const noexcept { return times_.size() - 1; }
  double total_time() const noexcept { return times_.back(); }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  std::span<const double> times() const noexcept { return times_; }

  /// Width of interval i, i.e. t_i - t_{i-1}, for 1 <= i <= N.
  double dt(std::size_t i) const;

 private:
  std::vector<double> times_;
};

/// t_i = i * T / N, with the last point pinned to exactly T.
TimeGrid make_uniform_grid(std::size_t steps, double total_time = 1.0);

}  // namespace pmiflow
