#include "fluidq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidq/errors.hpp"

namespace fluidq {

std::size_t grid_intervals(double horizon, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) fail(ErrorKind::invalid_argument, "step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    fail(ErrorKind::invalid_argument, "horizon must be non-negative");
  if (step > horizon && horizon > 0.0) fail(ErrorKind::invalid_argument, "step exceeds horizon");
  return static_cast<std::size_t>(std::llround(horizon / step));
}

std::size_t grid_index(double t, double step) {
  if (!(t >= 0.0)) fail(ErrorKind::grid_mismatch, "time must be non-negative");
  const double k = std::round(t / step);
  if (std::abs(k * step - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    std::ostringstream os;
    os << "time " << t << " is not on the grid of step " << step;
    fail(ErrorKind::grid_mismatch, os.str());
  }
  return static_cast<std::size_t>(k);
}

std::vector<double> linspace_step(double lo, double hi, double dx) {
  if (!(dx > 0.0) || !(hi >= lo)) fail(ErrorKind::invalid_argument, "linspace_step: need dx > 0, hi >= lo");
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dx - 1e-9));
  std::vector<double> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * dx);
  out.push_back(hi);
  return out;
}

MeasureTail::MeasureTail(std::vector<double> x, std::vector<double> values)
    : x_(std::move(x)), values_(std::move(values)) {
  if (x_.size() != values_.size()) fail(ErrorKind::invalid_argument, "tail: x and values differ in length");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) fail(ErrorKind::invalid_argument, "tail: x-grid must increase strictly");
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "tail: values must be finite");
}

double MeasureTail::at(double x) const {
  if (x_.empty()) return 0.0;
  if (x <= x_.front()) return values_.front();
  const double last = x_.back();
  if (x >= last) {
    if (!(last > 0.0) || x >= 2.0 * last) return 0.0;
    return values_.back() * (2.0 - x / last);
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto i = static_cast<std::size_t>(it - x_.begin());
  const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

double MeasureTail::max_increase() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) worst = std::max(worst, values_[i] - values_[i - 1]);
  return worst;
}

double MeasureTail::inverse(double level) const {
  if (x_.empty()) return 0.0;
  double lo = x_.front();
  double hi = x_.back() > 0.0 ? 2.0 * x_.back() : x_.back();
  if (at(lo) <= level) return lo;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid) <= level) hi = mid; else lo = mid;
  }
  return hi;
}

}  // namespace fluidq
