#pragma once

#include <cstddef>
#include <vector>

namespace fluidq::detail {

/// Cell masses w_k = mu((k-1)h, kh] of a measure sampled on a grid, folded so
/// that the midpoint-in-cell Stieltjes sum
///   sum_{k=1}^{n} (f_{n-k+1} + f_{n-k}) / 2 * w_k
/// becomes a plain correlation sum_{j=1}^{n} f_j * folded[n-j] + f_0 * w_n / 2.
class CellWeights {
 public:
  /// `cdf` holds mu([0, kh]) for k = 0..N; any atom at 0 is ignored here.
  explicit CellWeights(const std::vector<double>& cdf);

  std::size_t size() const { return cell_.size(); }
  double cell(std::size_t k) const { return cell_[k]; }
  double folded(std::size_t m) const { return folded_[m]; }

  /// sum_{j=1}^{n-1} f[j] * folded[n-j] + f[0] * cell[n] / 2: every term of
  /// the sum at index n except the one carrying f[n].
  double history(const double* f, std::size_t n) const;

  /// Full midpoint sum at index n.
  double sum(const double* f, std::size_t n) const {
    return n == 0 ? 0.0 : history(f, n) + f[n] * folded_[0];
  }

 private:
  std::vector<double> cell_;    // cell_[0] = 0
  std::vector<double> folded_;  // folded_[m] = (cell_[m] + cell_[m+1]) / 2
};

}  // namespace fluidq::detail
