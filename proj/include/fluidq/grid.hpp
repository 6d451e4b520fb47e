#pragma once

#include <cstddef>
#include <vector>

namespace fluidq {

/// Samples of a function at t = 0, step, 2*step, ...
struct GridFunction {
  double step = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double horizon() const { return step * static_cast<double>(values.empty() ? 0 : values.size() - 1); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Number of grid intervals covering [0, horizon]; horizon must be a multiple
/// of step up to rounding.
std::size_t grid_intervals(double horizon, double step);

/// Index of t on a grid of the given step, or grid_mismatch when t is not a
/// grid point.
std::size_t grid_index(double t, double step);

/// Evenly spaced points lo, lo+dx, ..., hi (hi always included).
std::vector<double> linspace_step(double lo, double hi, double dx);

/// Tail function x -> mass(C_x), C_x = (x, inf), sampled on an increasing
/// x-grid and linearly interpolated.
///
/// Left of the grid the first value holds. Right of the grid the last value
/// decays linearly to zero at twice the last abscissa (or is held at zero when
/// the last abscissa is not positive).
class MeasureTail {
 public:
  MeasureTail() = default;
  MeasureTail(std::vector<double> x, std::vector<double> values);

  static MeasureTail zero() { return {}; }

  bool empty() const { return x_.empty(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& values() const { return values_; }

  double at(double x) const;

  /// Largest increase between consecutive samples (0 for a valid tail).
  double max_increase() const;

  /// Smallest x with at(x) <= level, searched on [x_front, 2 * x_back].
  double inverse(double level) const;

 private:
  std::vector<double> x_;
  std::vector<double> values_;
};

}  // namespace fluidq
