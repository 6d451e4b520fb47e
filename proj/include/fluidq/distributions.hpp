#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fluidq {

using Rng = std::mt19937_64;

struct Exponential {
  double rate;
};

/// Sum of k i.i.d. exponentials with the given rate; mean k / rate.
struct Erlang {
  int k;
  double rate;
};

struct HyperExponential {
  std::vector<double> probs;
  std::vector<double> rates;
};

struct Uniform {
  double a;
  double b;
};

/// Parameterized on the log scale: log(X) ~ Normal(mu, sigma^2).
struct LogNormal {
  double mu;
  double sigma;
};

struct Weibull {
  double shape;
  double scale;
};

/// Linear interpolation of (x, F(x)) knots. When `pareto_index` is set the
/// law continues past the last knot with tail
///   F^c(x) = F^c(x_last) * (x_last / x)^pareto_index,
/// otherwise the last knot must carry F = 1.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> points;
  std::optional<double> pareto_index;
};

using Family = std::variant<Exponential, Erlang, HyperExponential, Uniform,
                            LogNormal, Weibull, PiecewiseLinear>;

/// A value of the integrated tail or mean that may be unbounded.
struct Extent {
  double value = 0.0;
  bool unbounded = false;

  static Extent finite(double v) { return {v, false}; }
  static Extent infinite() { return {0.0, true}; }
};

/// Immutable service or patience law.
///
/// All families are supported on [0, inf) and are continuous (no atoms), so
/// cdf(x) = 0 for x <= 0. The integrated tail F_d(x) = int_0^x F^c(y) dy is
/// evaluated in closed form for every family.
class DistributionModel {
 public:
  explicit DistributionModel(Family family,
                             std::optional<double> lipschitz_bound = {});

  static DistributionModel exponential(double rate);
  static DistributionModel erlang(int k, double rate);
  static DistributionModel hyperexponential(std::vector<double> probs,
                                            std::vector<double> rates);
  static DistributionModel uniform(double a, double b);
  static DistributionModel lognormal(double mu, double sigma);
  /// Lognormal with the given mean and log-scale sigma.
  static DistributionModel lognormal_mean(double mean, double sigma);
  static DistributionModel weibull(double shape, double scale);
  static DistributionModel piecewise(std::vector<std::pair<double, double>> points,
                                     std::optional<double> pareto_index = {});

  const Family& family() const { return family_; }
  std::string family_name() const;
  const std::optional<double>& lipschitz_bound() const { return lipschitz_; }
  DistributionModel with_lipschitz_bound(double bound) const;

  double cdf(double x) const;
  double tail(double x) const { return 1.0 - cdf(x); }

  /// Mean, i.e. the integrated tail over [0, inf).
  Extent mean() const;

  /// int_0^x F^c(y) dy. For x < 0 this continues as x (F^c = 1 there), which
  /// is the form the virtual-buffer measure needs at negative test points.
  double integrated_tail(double x) const;

  /// Smallest x with cdf(x) >= p, for p in [0, 1).
  double quantile(double p) const;

  /// Supremum of the support (infinite for unbounded families).
  double support_end() const;

  double sample(Rng& rng) const;

  /// Largest finite-difference slope of the CDF on [0, x_max] at step dx.
  double max_slope(double dx, double x_max) const;

 private:
  Family family_;
  std::optional<double> lipschitz_;
  Extent mean_;
};

/// G_e(x) = mu * int_0^x G^c(y) dy, the stationary-excess law of g.
double equilibrium_cdf(const DistributionModel& g, double x);

/// F_d(x) = int_0^x (1 - F(y)) dy for x >= 0.
double patience_area(const DistributionModel& f, double x);

/// Smallest y with F_d(y) = q, by bisection to 1e-10 in the argument.
/// Requires 0 <= q < N_F.
double patience_area_inverse(const DistributionModel& f, double q);

/// Survival fraction H(x) = F^c(F_d^{-1}(x / lambda)) of scheduled fluid, and
/// 0 once x reaches lambda * N_F.
double survival_fraction(const DistributionModel& f, double lambda, double x);

/// Throws invalid_distribution when the law cannot serve as a service time
/// (infinite mean).
void require_service_law(const DistributionModel& g);

/// Throws invalid_distribution when the discretized CDF slope exceeds the
/// model's declared Lipschitz bound.
void check_lipschitz(const DistributionModel& f, double dx);

}  // namespace fluidq
