#include "fluidq/renewal.hpp"

#include <cmath>

#include "fluidq/errors.hpp"
#include "stieltjes.hpp"

namespace fluidq {

GridFunction sample_cdf(const DistributionModel& d, double horizon, double step) {
  const std::size_t n = grid_intervals(horizon, step);
  GridFunction out{step, std::vector<double>(n + 1)};
  for (std::size_t k = 0; k <= n; ++k) out.values[k] = d.cdf(static_cast<double>(k) * step);
  return out;
}

GridFunction renewal_function(const DistributionModel& g, double horizon, double step) {
  require_service_law(g);
  if (!(horizon > 0.0)) fail(ErrorKind::invalid_argument, "renewal_function: horizon must be positive");
  const GridFunction cdf = sample_cdf(g, horizon, step);
  const detail::CellWeights weights(cdf.values);
  const std::size_t n = cdf.size() - 1;

  GridFunction u{step, std::vector<double>(n + 1, 0.0)};
  u.values[0] = 1.0;
  const double diag = weights.folded(0);
  for (std::size_t i = 1; i <= n; ++i) {
    u.values[i] = (1.0 + weights.history(u.values.data(), i)) / (1.0 - diag);
  }
  return u;
}

namespace {

GridFunction convolve(const GridFunction& f, const std::vector<double>& mu, std::size_t n) {
  const detail::CellWeights weights(mu);
  GridFunction out{f.step, std::vector<double>(n + 1, 0.0)};
  const double atom = mu.front();
  for (std::size_t i = 0; i <= n; ++i)
    out.values[i] = atom * f.values[i] + weights.sum(f.values.data(), i);
  return out;
}

std::size_t checked_length(const GridFunction& f, double horizon) {
  const std::size_t n = grid_intervals(horizon, f.step);
  if (f.size() < n + 1) fail(ErrorKind::grid_mismatch, "stieltjes_convolve: integrand shorter than horizon");
  return n;
}

}  // namespace

GridFunction stieltjes_convolve(const GridFunction& f, const GridFunction& mu, double horizon) {
  if (std::abs(f.step - mu.step) > 1e-12 * f.step)
    fail(ErrorKind::grid_mismatch, "stieltjes_convolve: grids have different steps");
  const std::size_t n = checked_length(f, horizon);
  if (mu.size() < n + 1) fail(ErrorKind::grid_mismatch, "stieltjes_convolve: measure shorter than horizon");
  return convolve(f, std::vector<double>(mu.values.begin(), mu.values.begin() + static_cast<long>(n + 1)), n);
}

GridFunction stieltjes_convolve(const GridFunction& f, const DistributionModel& mu, double horizon) {
  const std::size_t n = checked_length(f, horizon);
  return convolve(f, sample_cdf(mu, static_cast<double>(n) * f.step, f.step).values, n);
}

}  // namespace fluidq
