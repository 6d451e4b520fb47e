#include "fluidq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fluidq/errors.hpp"

namespace fluidq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

[[noreturn]] void bad(const std::string& what) {
  fail(ErrorKind::invalid_distribution, what);
}

void validate(const Exponential& d) {
  if (!(d.rate > 0.0) || !std::isfinite(d.rate)) bad("exponential: rate must be positive");
}

void validate(const Erlang& d) {
  if (d.k < 1) bad("erlang: k must be >= 1");
  if (!(d.rate > 0.0) || !std::isfinite(d.rate)) bad("erlang: rate must be positive");
}

void validate(const HyperExponential& d) {
  if (d.probs.empty() || d.probs.size() != d.rates.size())
    bad("hyperexponential: probs and rates must be non-empty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    if (!(d.probs[i] >= 0.0)) bad("hyperexponential: negative probability");
    if (!(d.rates[i] > 0.0)) bad("hyperexponential: rates must be positive");
    total += d.probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) bad("hyperexponential: probabilities must sum to 1");
}

void validate(const Uniform& d) {
  if (!(d.a >= 0.0) || !(d.b > d.a) || !std::isfinite(d.b))
    bad("uniform: need 0 <= a < b < inf");
}

void validate(const LogNormal& d) {
  if (!std::isfinite(d.mu) || !(d.sigma > 0.0) || !std::isfinite(d.sigma))
    bad("lognormal: need finite mu and sigma > 0");
}

void validate(const Weibull& d) {
  if (!(d.shape > 0.0) || !(d.scale > 0.0) || !std::isfinite(d.shape) ||
      !std::isfinite(d.scale))
    bad("weibull: shape and scale must be positive");
}

void validate(const PiecewiseLinear& d) {
  const auto& p = d.points;
  if (p.size() < 2) bad("piecewise: need at least two knots");
  if (p.front().first < 0.0) bad("piecewise: knots must lie in [0, inf)");
  if (p.front().second != 0.0) bad("piecewise: first knot must carry F = 0 (no atoms)");
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!(p[i].first > p[i - 1].first)) bad("piecewise: knot abscissae must increase strictly");
    if (p[i].second < p[i - 1].second) bad("piecewise: CDF values must be non-decreasing");
  }
  const double last = p.back().second;
  if (last > 1.0) bad("piecewise: CDF values must not exceed 1");
  if (d.pareto_index) {
    if (!(*d.pareto_index > 0.0)) bad("piecewise: pareto_index must be positive");
    if (!(last < 1.0)) bad("piecewise: a Pareto tail needs the last knot below 1");
    if (!(p.back().first > 0.0)) bad("piecewise: a Pareto tail needs a positive last knot");
  } else if (last != 1.0) {
    bad("piecewise: last knot must carry F = 1 unless a Pareto tail is given");
  }
}

// int_0^x F^c for a piecewise law, exact on each linear segment.
double piecewise_integrated(const PiecewiseLinear& d, double x) {
  const auto& p = d.points;
  if (x <= p.front().first) return x;
  double acc = p.front().first;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const auto [x0, f0] = p[i - 1];
    const auto [x1, f1] = p[i];
    if (x <= x1) {
      const double fx = f0 + (f1 - f0) * (x - x0) / (x1 - x0);
      return acc + (x - x0) * (1.0 - 0.5 * (f0 + fx));
    }
    acc += (x1 - x0) * (1.0 - 0.5 * (f0 + f1));
  }
  if (!d.pareto_index) return acc;
  const double xl = p.back().first;
  const double c = 1.0 - p.back().second;
  const double a = *d.pareto_index;
  const double u = x / xl;
  if (std::abs(a - 1.0) < 1e-12) return acc + c * xl * std::log(u);
  return acc + c * xl * (std::pow(u, 1.0 - a) - 1.0) / (1.0 - a);
}

double piecewise_cdf(const PiecewiseLinear& d, double x) {
  const auto& p = d.points;
  if (x <= p.front().first) return 0.0;
  if (x >= p.back().first) {
    if (!d.pareto_index) return 1.0;
    const double c = 1.0 - p.back().second;
    return 1.0 - c * std::pow(p.back().first / x, *d.pareto_index);
  }
  auto it = std::upper_bound(p.begin(), p.end(), x,
                             [](double v, const auto& k) { return v < k.first; });
  const auto [x1, f1] = *it;
  const auto [x0, f0] = *(it - 1);
  return f0 + (f1 - f0) * (x - x0) / (x1 - x0);
}

double piecewise_quantile(const PiecewiseLinear& d, double prob) {
  const auto& p = d.points;
  if (prob <= 0.0) return p.front().first;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const auto [x0, f0] = p[i - 1];
    const auto [x1, f1] = p[i];
    if (prob <= f1 && f1 > f0) {
      if (prob <= f0) return x0;
      return x0 + (x1 - x0) * (prob - f0) / (f1 - f0);
    }
  }
  if (!d.pareto_index) return p.back().first;
  const double c = 1.0 - p.back().second;
  return p.back().first * std::pow(c / (1.0 - prob), 1.0 / *d.pareto_index);
}

Extent compute_mean(const Family& family) {
  return std::visit(
      Overloaded{
          [](const Exponential& d) { return Extent::finite(1.0 / d.rate); },
          [](const Erlang& d) { return Extent::finite(d.k / d.rate); },
          [](const HyperExponential& d) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.probs.size(); ++i) m += d.probs[i] / d.rates[i];
            return Extent::finite(m);
          },
          [](const Uniform& d) { return Extent::finite(0.5 * (d.a + d.b)); },
          [](const LogNormal& d) {
            return Extent::finite(std::exp(d.mu + 0.5 * d.sigma * d.sigma));
          },
          [](const Weibull& d) {
            return Extent::finite(d.scale * std::tgamma(1.0 + 1.0 / d.shape));
          },
          [](const PiecewiseLinear& d) {
            const double at_last = piecewise_integrated(d, d.points.back().first);
            if (!d.pareto_index) return Extent::finite(at_last);
            const double a = *d.pareto_index;
            if (a <= 1.0) return Extent::infinite();
            const double c = 1.0 - d.points.back().second;
            return Extent::finite(at_last + c * d.points.back().first / (a - 1.0));
          },
      },
      family);
}

}  // namespace

DistributionModel::DistributionModel(Family family, std::optional<double> lipschitz_bound)
    : family_(std::move(family)), lipschitz_(lipschitz_bound) {
  std::visit([](const auto& d) { validate(d); }, family_);
  if (lipschitz_ && !(*lipschitz_ > 0.0)) bad("lipschitz_bound must be positive");
  mean_ = compute_mean(family_);
}

DistributionModel DistributionModel::exponential(double rate) {
  return DistributionModel(Exponential{rate});
}
DistributionModel DistributionModel::erlang(int k, double rate) {
  return DistributionModel(Erlang{k, rate});
}
DistributionModel DistributionModel::hyperexponential(std::vector<double> probs,
                                                      std::vector<double> rates) {
  return DistributionModel(HyperExponential{std::move(probs), std::move(rates)});
}
DistributionModel DistributionModel::uniform(double a, double b) {
  return DistributionModel(Uniform{a, b});
}
DistributionModel DistributionModel::lognormal(double mu, double sigma) {
  return DistributionModel(LogNormal{mu, sigma});
}
DistributionModel DistributionModel::lognormal_mean(double mean, double sigma) {
  if (!(mean > 0.0)) bad("lognormal: mean must be positive");
  return DistributionModel(LogNormal{std::log(mean) - 0.5 * sigma * sigma, sigma});
}
DistributionModel DistributionModel::weibull(double shape, double scale) {
  return DistributionModel(Weibull{shape, scale});
}
DistributionModel DistributionModel::piecewise(std::vector<std::pair<double, double>> points,
                                               std::optional<double> pareto_index) {
  return DistributionModel(PiecewiseLinear{std::move(points), pareto_index});
}

DistributionModel DistributionModel::with_lipschitz_bound(double bound) const {
  return DistributionModel(family_, bound);
}

std::string DistributionModel::family_name() const {
  return std::visit(Overloaded{
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Erlang&) { return std::string("erlang"); },
                        [](const HyperExponential&) { return std::string("hyperexponential"); },
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const LogNormal&) { return std::string("lognormal"); },
                        [](const Weibull&) { return std::string("weibull"); },
                        [](const PiecewiseLinear&) { return std::string("piecewise_linear"); },
                    },
                    family_);
}

double DistributionModel::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  return std::visit(
      Overloaded{
          [x](const Exponential& d) { return -std::expm1(-d.rate * x); },
          [x](const Erlang& d) { return boost::math::gamma_p(static_cast<double>(d.k), d.rate * x); },
          [x](const HyperExponential& d) {
            double tail = 0.0;
            for (std::size_t i = 0; i < d.probs.size(); ++i)
              tail += d.probs[i] * std::exp(-d.rates[i] * x);
            return 1.0 - tail;
          },
          [x](const Uniform& d) {
            if (x <= d.a) return 0.0;
            if (x >= d.b) return 1.0;
            return (x - d.a) / (d.b - d.a);
          },
          [x](const LogNormal& d) { return normal_cdf((std::log(x) - d.mu) / d.sigma); },
          [x](const Weibull& d) { return -std::expm1(-std::pow(x / d.scale, d.shape)); },
          [x](const PiecewiseLinear& d) { return piecewise_cdf(d, x); },
      },
      family_);
}

Extent DistributionModel::mean() const { return mean_; }

double DistributionModel::integrated_tail(double x) const {
  if (!(x > 0.0)) return x;
  return std::visit(
      Overloaded{
          [x](const Exponential& d) { return -std::expm1(-d.rate * x) / d.rate; },
          [x](const Erlang& d) {
            double acc = 0.0;
            for (int m = 1; m <= d.k; ++m)
              acc += boost::math::gamma_p(static_cast<double>(m), d.rate * x);
            return acc / d.rate;
          },
          [x](const HyperExponential& d) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d.probs.size(); ++i)
              acc += d.probs[i] * (-std::expm1(-d.rates[i] * x)) / d.rates[i];
            return acc;
          },
          [x](const Uniform& d) {
            if (x <= d.a) return x;
            const double w = d.b - d.a;
            const double y = std::min(x, d.b);
            return d.a + (w * w - (d.b - y) * (d.b - y)) / (2.0 * w);
          },
          [x](const LogNormal& d) {
            const double z = (std::log(x) - d.mu) / d.sigma;
            const double tail = normal_cdf(-z);
            return x * tail + std::exp(d.mu + 0.5 * d.sigma * d.sigma) * normal_cdf(z - d.sigma);
          },
          [x](const Weibull& d) {
            const double u = std::pow(x / d.scale, d.shape);
            return d.scale * std::tgamma(1.0 + 1.0 / d.shape) *
                   boost::math::gamma_p(1.0 / d.shape, u);
          },
          [x](const PiecewiseLinear& d) { return piecewise_integrated(d, x); },
      },
      family_);
}

double DistributionModel::support_end() const {
  return std::visit(Overloaded{
                        [](const Uniform& d) { return d.b; },
                        [](const PiecewiseLinear& d) {
                          return d.pareto_index ? kInf : d.points.back().first;
                        },
                        [](const auto&) { return kInf; },
                    },
                    family_);
}

double DistributionModel::quantile(double p) const {
  if (!(p >= 0.0) || !(p < 1.0)) fail(ErrorKind::invalid_argument, "quantile: p must lie in [0, 1)");
  if (const auto* e = std::get_if<Exponential>(&family_)) return -std::log1p(-p) / e->rate;
  if (const auto* u = std::get_if<Uniform>(&family_)) return p <= 0.0 ? 0.0 : u->a + p * (u->b - u->a);
  if (const auto* w = std::get_if<Weibull>(&family_))
    return w->scale * std::pow(-std::log1p(-p), 1.0 / w->shape);
  if (const auto* pw = std::get_if<PiecewiseLinear>(&family_)) return piecewise_quantile(*pw, p);
  if (p == 0.0) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; cdf(hi) < p; ++i) {
    if (i > 2000) fail(ErrorKind::numerical_failure, "quantile: failed to bracket");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= p) hi = mid; else lo = mid;
  }
  return hi;
}

double DistributionModel::sample(Rng& rng) const {
  return std::visit(
      Overloaded{
          [&rng](const Exponential& d) { return std::exponential_distribution<double>(d.rate)(rng); },
          [&rng](const Erlang& d) {
            return std::gamma_distribution<double>(d.k, 1.0 / d.rate)(rng);
          },
          [&rng](const HyperExponential& d) {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            double acc = 0.0;
            std::size_t i = 0;
            for (; i + 1 < d.probs.size(); ++i) {
              acc += d.probs[i];
              if (u < acc) break;
            }
            return std::exponential_distribution<double>(d.rates[i])(rng);
          },
          [&rng](const Uniform& d) { return std::uniform_real_distribution<double>(d.a, d.b)(rng); },
          [&rng](const LogNormal& d) { return std::lognormal_distribution<double>(d.mu, d.sigma)(rng); },
          [&rng](const Weibull& d) {
            return std::weibull_distribution<double>(d.shape, d.scale)(rng);
          },
          [&rng](const PiecewiseLinear& d) {
            return piecewise_quantile(d, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
          },
      },
      family_);
}

double DistributionModel::max_slope(double dx, double x_max) const {
  if (!(dx > 0.0) || !(x_max > 0.0)) fail(ErrorKind::invalid_argument, "max_slope: dx, x_max must be positive");
  double worst = 0.0;
  double prev = cdf(0.0);
  const auto steps = static_cast<std::size_t>(std::ceil(x_max / dx));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double cur = cdf(static_cast<double>(i) * dx);
    worst = std::max(worst, (cur - prev) / dx);
    prev = cur;
  }
  return worst;
}

double equilibrium_cdf(const DistributionModel& g, double x) {
  require_service_law(g);
  if (!(x > 0.0)) return 0.0;
  return std::min(1.0, g.integrated_tail(x) / g.mean().value);
}

double patience_area(const DistributionModel& f, double x) {
  if (x < 0.0) fail(ErrorKind::invalid_argument, "patience_area: x must be non-negative");
  return f.integrated_tail(x);
}

double patience_area_inverse(const DistributionModel& f, double q) {
  if (!(q >= 0.0)) fail(ErrorKind::invalid_argument, "patience_area_inverse: q must be non-negative");
  const Extent nf = f.mean();
  if (!nf.unbounded && q >= nf.value)
    fail(ErrorKind::invalid_argument, "patience_area_inverse: q must be below the patience mean");
  if (q == 0.0) return 0.0;

  double lo = 0.0;
  double hi = std::max(1.0, q);
  for (int i = 0; f.integrated_tail(hi) < q; ++i) {
    if (i > 1100) fail(ErrorKind::numerical_failure, "patience_area_inverse: failed to bracket");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-10 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    if (f.integrated_tail(mid) >= q) hi = mid; else lo = mid;
  }
  return hi;
}

double survival_fraction(const DistributionModel& f, double lambda, double x) {
  if (!(lambda > 0.0)) fail(ErrorKind::invalid_argument, "survival_fraction: lambda must be positive");
  if (!(x > 0.0)) return f.tail(0.0);
  const double q = x / lambda;
  const Extent nf = f.mean();
  if (!nf.unbounded && q >= nf.value) return 0.0;
  return f.tail(patience_area_inverse(f, q));
}

void require_service_law(const DistributionModel& g) {
  if (g.mean().unbounded)
    fail(ErrorKind::invalid_distribution, "service law must have a finite mean");
}

void check_lipschitz(const DistributionModel& f, double dx) {
  if (!f.lipschitz_bound()) return;
  double x_max = f.support_end();
  if (!std::isfinite(x_max)) x_max = std::max(10.0, f.quantile(1.0 - 1e-6));
  const double slope = f.max_slope(dx, x_max);
  if (slope > *f.lipschitz_bound() * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << f.family_name() << ": CDF slope " << slope << " exceeds Lipschitz bound "
       << *f.lipschitz_bound();
    fail(ErrorKind::invalid_distribution, os.str());
  }
}

}  // namespace fluidq
