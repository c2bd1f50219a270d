#include "pmiflow/time_grid.hpp"

#include <cmath>
#include <string>

#include "pmiflow/errors.hpp"

namespace pmiflow {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw InvalidArgument("TimeGrid needs at least two points");
  if (times_.front() != 0.0) throw InvalidArgument("TimeGrid must start at t = 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !(times_[i] > times_[i - 1])) {
      throw InvalidArgument("TimeGrid must be strictly increasing (index " +
                            std::to_string(i) + ")");
    }
  }
}

double TimeGrid::dt(std::size_t i) const {
  if (i == 0 || i > steps()) {
    throw InvalidArgument("TimeGrid::dt index out of range: " + std::to_string(i));
  }
  return times_[i] - times_[i - 1];
}

TimeGrid make_uniform_grid(std::size_t steps, double total_time) {
  if (steps == 0) throw InvalidArgument("uniform grid needs N >= 1");
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw InvalidArgument("uniform grid needs T > 0");
  }
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) {
    t[i] = static_cast<double>(i) * total_time / static_cast<double>(steps);
  }
  t[steps] = total_time;
  return TimeGrid(std::move(t));
}

}  // namespace pmiflow
