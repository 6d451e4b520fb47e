#pragma once

#include "fluidq/distributions.hpp"
#include "fluidq/grid.hpp"

namespace fluidq {

/// Renewal function U_G(t) = sum_{n>=0} G^{n*}(t) on [0, horizon], obtained by
/// forward substitution of U = 1 + U * dG with midpoint-in-cell Stieltjes
/// sums. U(0) = 1.
GridFunction renewal_function(const DistributionModel& g, double horizon, double step);

/// (f * dmu)(t) = int_[0,t] f(t-s) dmu(s), where dmu is given by its CDF
/// samples mu([0, kh]). A nonzero mu(0) is treated as an atom at s = 0.
GridFunction stieltjes_convolve(const GridFunction& f, const GridFunction& mu, double horizon);

/// Same, with dmu the increments of a continuous law's CDF.
GridFunction stieltjes_convolve(const GridFunction& f, const DistributionModel& mu, double horizon);

/// CDF of d sampled at 0, step, ..., n*step.
GridFunction sample_cdf(const DistributionModel& d, double horizon, double step);

}  // namespace fluidq
