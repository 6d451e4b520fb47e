#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fluidq/distributions.hpp"
#include "fluidq/errors.hpp"
#include "oracles.hpp"

using namespace fluidq;

namespace {

std::vector<DistributionModel> zoo() {
  return {
      DistributionModel::exponential(1.5),
      DistributionModel::erlang(3, 2.0),
      DistributionModel::hyperexponential({0.3, 0.7}, {0.5, 3.0}),
      DistributionModel::uniform(0.2, 1.7),
      DistributionModel::lognormal_mean(1.0, 0.8),
      DistributionModel::weibull(1.7, 1.2),
      DistributionModel::weibull(0.6, 0.9),
      DistributionModel::piecewise({{0.0, 0.0}, {0.5, 0.4}, {1.0, 0.4}, {2.0, 1.0}}),
      DistributionModel::piecewise({{0.0, 0.0}, {1.0, 0.5}}, 1.0),
      DistributionModel::piecewise({{0.0, 0.0}, {0.5, 0.3}}, 2.5),
  };
}

void check_kind(ErrorKind kind, const std::function<void()>& body) {
  try {
    body();
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

}  // namespace

TEST_CASE("evaluate at documented points") {
  const auto e1 = DistributionModel::exponential(1.0);
  CHECK(e1.cdf(0.0) == 0.0);
  CHECK(e1.tail(0.0) == 1.0);
  CHECK(e1.cdf(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e1.tail(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
  const auto u = DistributionModel::uniform(0.0, 2.0);
  CHECK(u.cdf(0.5) == doctest::Approx(0.25));
  CHECK(u.tail(0.5) == doctest::Approx(0.75));
  for (const auto& d : zoo()) {
    CHECK(d.cdf(-1.0) == 0.0);
    CHECK(d.tail(-1.0) == 1.0);
  }
}

TEST_CASE("complement identity, monotone CDF and unit limit") {
  for (const auto& d : zoo()) {
    double prev = 0.0;
    for (double x = 0.0; x <= 20.0; x += 1e-3) {
      const double c = d.cdf(x);
      REQUIRE(c + d.tail(x) == 1.0);
      REQUIRE(c >= prev);
      prev = c;
    }
    CHECK(d.cdf(1e9) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("means against independent closed forms") {
  const std::vector<double> expected = {
      1.0 / 1.5,
      3.0 / 2.0,
      0.3 / 0.5 + 0.7 / 3.0,
      0.5 * (0.2 + 1.7),
      1.0,
      1.2 * std::tgamma(1.0 + 1.0 / 1.7),
      0.9 * std::tgamma(1.0 + 1.0 / 0.6),
      // Tail area over [0, 0.5], [0.5, 1] and [1, 2].
      0.4 + 0.3 + 0.3,
      -1.0,
      0.5 - 0.3 * 0.5 * 0.5 + 0.7 * 0.5 / 1.5,
  };
  const auto laws = zoo();
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const Extent m = laws[i].mean();
    if (expected[i] < 0.0) {
      CHECK(m.unbounded);
      continue;
    }
    CHECK(!m.unbounded);
    CHECK(m.value == doctest::Approx(expected[i]).epsilon(1e-10));
  }
  CHECK(!DistributionModel::piecewise({{0.0, 0.0}, {1.0, 0.5}}, 1.5).mean().unbounded);
}

TEST_CASE("equilibrium_cdf") {
  for (double mu : {0.5, 1.0, 3.0}) {
    const auto g = DistributionModel::exponential(mu);
    for (double x : {0.0, 0.3, 1.0, 4.0}) CHECK(equilibrium_cdf(g, x) == doctest::Approx(1.0 - std::exp(-mu * x)));
  }
  // Erlang-2 with mean 1: G^c(y) = e^{-2y} (1 + 2y).
  const auto g = DistributionModel::erlang(2, 2.0);
  const double ref = oracle::trapezoid([](double y) { return std::exp(-2.0 * y) * (1.0 + 2.0 * y); }, 0.0, 1.0, 1e-5);
  CHECK(equilibrium_cdf(g, 1.0) == doctest::Approx(ref).epsilon(1e-9));
  for (const auto& d : zoo()) {
    if (d.mean().unbounded) {
      check_kind(ErrorKind::invalid_distribution, [&] { equilibrium_cdf(d, 1.0); });
      continue;
    }
    CHECK(equilibrium_cdf(d, 0.0) == 0.0);
    double prev = 0.0;
    for (double x = 0.0; x < 30.0; x += 0.01) {
      const double v = equilibrium_cdf(d, x);
      REQUIRE(v >= prev - 1e-15);
      prev = v;
    }
    CHECK(equilibrium_cdf(d, 1e4) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("patience_area") {
  const auto e1 = DistributionModel::exponential(1.0);
  CHECK(patience_area(e1, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  for (const auto& d : zoo()) CHECK(patience_area(d, 0.0) == 0.0);

  const auto steep = DistributionModel::piecewise({{0.0, 0.0}, {0.995, 0.0}, {1.005, 1.0}});
  const double ref = oracle::trapezoid([&](double y) { return steep.tail(y); }, 0.0, 2.0, 1e-5);
  CHECK(patience_area(steep, 2.0) == doctest::Approx(ref).epsilon(1e-8));
  CHECK(patience_area(steep, 2.0) == doctest::Approx(1.0).epsilon(1e-9));

  check_kind(ErrorKind::invalid_argument, [&] { patience_area(e1, -0.1); });

  // Concave: finite-difference slopes do not increase.
  for (const auto& d : zoo()) {
    const double h = 0.01;
    double prev = 1.0;
    for (double x = 0.0; x < 10.0; x += h) {
      const double slope = (patience_area(d, x + h) - patience_area(d, x)) / h;
      REQUIRE(slope <= prev + 1e-12);
      prev = slope;
    }
  }
  // Quadrature agreement for the closed forms.
  for (const auto& d : zoo()) {
    for (double x : {0.25, 1.0, 3.0}) {
      const double q = oracle::trapezoid([&](double y) { return d.tail(y); }, 0.0, x, 1e-5);
      CHECK(patience_area(d, x) == doctest::Approx(q).epsilon(1e-8));
    }
  }
}

TEST_CASE("patience_area_inverse") {
  const auto e1 = DistributionModel::exponential(1.0);
  CHECK(patience_area_inverse(e1, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  for (const auto& d : zoo()) CHECK(patience_area_inverse(d, 0.0) == 0.0);

  const auto u = DistributionModel::uniform(0.0, 1.0);
  const double ref = oracle::bisect([](double y) { return y - 0.5 * y * y - 0.375; }, 0.0, 1.0);
  CHECK(ref == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(patience_area_inverse(u, 0.375) == doctest::Approx(ref).epsilon(1e-9));

  check_kind(ErrorKind::invalid_argument, [&] { patience_area_inverse(u, -0.1); });
  check_kind(ErrorKind::invalid_argument, [&] { patience_area_inverse(u, 0.5); });
  check_kind(ErrorKind::invalid_argument, [&] { patience_area_inverse(u, 0.7); });

  // Round trip on [0, 0.99 N_F], or [0, 20] for unbounded N_F.
  for (const auto& d : zoo()) {
    const Extent nf = d.mean();
    const double top = nf.unbounded ? 20.0 : 0.99 * nf.value;
    for (int i = 0; i <= 200; ++i) {
      const double q = top * i / 200.0;
      REQUIRE(std::abs(patience_area(d, patience_area_inverse(d, q)) - q) <= 1e-8);
    }
  }
}

TEST_CASE("survival fraction H") {
  const auto e1 = DistributionModel::exponential(1.0);
  CHECK(survival_fraction(e1, 2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  for (double x = 0.0; x < 2.0; x += 0.1) CHECK(survival_fraction(e1, 2.0, x) == doctest::Approx(1.0 - x / 2.0).epsilon(1e-9));
  for (const auto& d : zoo()) CHECK(survival_fraction(d, 1.3, 0.0) == doctest::Approx(1.0));

  const auto u = DistributionModel::uniform(0.0, 1.0);
  for (double x : {0.5, 0.6, 3.0}) CHECK(survival_fraction(u, 1.0, x) == 0.0);

  for (const auto& d : zoo()) {
    const double lambda = 1.7;
    const Extent nf = d.mean();
    double prev = 1.0;
    for (double x = 0.0; x < 15.0; x += 0.01) {
      const double h = survival_fraction(d, lambda, x);
      REQUIRE(h >= 0.0);
      REQUIRE(h <= prev + 1e-12);
      if (!nf.unbounded && x >= lambda * nf.value) REQUIRE(h == 0.0);
      prev = h;
    }
  }
}

TEST_CASE("quantile and sampling") {
  for (const auto& d : zoo()) {
    for (double p : {0.0, 0.1, 0.5, 0.9, 0.999}) {
      const double x = d.quantile(p);
      CHECK(d.cdf(x) == doctest::Approx(p).epsilon(1e-8));
    }
  }
  // Flat stretch resolves to the smallest preimage.
  const auto flat = DistributionModel::piecewise({{0.0, 0.0}, {0.5, 0.4}, {1.0, 0.4}, {2.0, 1.0}});
  CHECK(flat.quantile(0.4) == doctest::Approx(0.5).epsilon(1e-9));

  Rng rng(11);
  for (const auto& d : zoo()) {
    if (d.mean().unbounded) continue;
    const int n = 200000;
    double sum = 0.0;
    double below = 0.0;
    const double median = d.quantile(0.5);
    for (int i = 0; i < n; ++i) {
      const double s = d.sample(rng);
      REQUIRE(s >= 0.0);
      sum += s;
      below += s <= median ? 1.0 : 0.0;
    }
    CHECK(sum / n == doctest::Approx(d.mean().value).epsilon(0.03));
    CHECK(below / n == doctest::Approx(0.5).epsilon(0.01));
  }
}

TEST_CASE("parameter validation") {
  const ErrorKind k = ErrorKind::invalid_distribution;
  check_kind(k, [] { DistributionModel::exponential(0.0); });
  check_kind(k, [] { DistributionModel::exponential(-1.0); });
  check_kind(k, [] { DistributionModel::erlang(0, 1.0); });
  check_kind(k, [] { DistributionModel::hyperexponential({0.5, 0.6}, {1.0, 2.0}); });
  check_kind(k, [] { DistributionModel::hyperexponential({0.5}, {1.0, 2.0}); });
  check_kind(k, [] { DistributionModel::uniform(1.0, 1.0); });
  check_kind(k, [] { DistributionModel::uniform(-1.0, 1.0); });
  check_kind(k, [] { DistributionModel::lognormal(0.0, 0.0); });
  check_kind(k, [] { DistributionModel::weibull(0.0, 1.0); });
  check_kind(k, [] { DistributionModel::piecewise({{0.0, 0.0}, {1.0, 0.5}}); });
  check_kind(k, [] { DistributionModel::piecewise({{0.0, 0.0}, {1.0, 0.7}, {2.0, 0.6}, {3.0, 1.0}}); });
  check_kind(k, [] { DistributionModel::piecewise({{0.0, 0.2}, {1.0, 1.0}}); });
  check_kind(k, [] { DistributionModel::exponential(1.0).with_lipschitz_bound(0.0); });
}

TEST_CASE("service laws need a finite mean") {
  require_service_law(DistributionModel::exponential(1.0));
  check_kind(ErrorKind::invalid_distribution,
             [] { require_service_law(DistributionModel::piecewise({{0.0, 0.0}, {1.0, 0.5}}, 1.0)); });
}

TEST_CASE("Lipschitz bound check") {
  const auto u = DistributionModel::uniform(0.0, 1.0);
  check_lipschitz(u.with_lipschitz_bound(1.0), 1e-3);
  check_lipschitz(u, 1e-3);  // no bound declared
  check_kind(ErrorKind::invalid_distribution, [&] { check_lipschitz(u.with_lipschitz_bound(0.5), 1e-3); });
  const auto e = DistributionModel::exponential(2.0);
  check_lipschitz(e.with_lipschitz_bound(2.0), 1e-3);
  check_kind(ErrorKind::invalid_distribution, [&] { check_lipschitz(e.with_lipschitz_bound(1.5), 1e-3); });
  const auto steep = DistributionModel::piecewise({{0.0, 0.0}, {0.995, 0.0}, {1.005, 1.0}});
  check_lipschitz(steep.with_lipschitz_bound(100.0), 1e-3);
}
