#include "stieltjes.hpp"

namespace fluidq::detail {

CellWeights::CellWeights(const std::vector<double>& cdf)
    : cell_(cdf.size(), 0.0), folded_(cdf.size(), 0.0) {
  for (std::size_t k = 1; k < cdf.size(); ++k) cell_[k] = cdf[k] - cdf[k - 1];
  for (std::size_t m = 0; m < cdf.size(); ++m)
    folded_[m] = 0.5 * (cell_[m] + (m + 1 < cdf.size() ? cell_[m + 1] : 0.0));
}

double CellWeights::history(const double* f, std::size_t n) const {
  if (n == 0) return 0.0;
  double acc = 0.5 * f[0] * cell_[n];
  const double* w = folded_.data() + n;
  for (std::size_t j = 1; j < n; ++j) acc += f[j] * *(w - j);
  return acc;
}

}  // namespace fluidq::detail
