#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gpres/asymptotics.hpp"
#include "support/generators.hpp"

using namespace gpres;
using Catch::Matchers::WithinAbs;

namespace {

// Two-level state with uniform equilibrium: D ~ 0.368, s ~ 0.659.
QCState skewed_coin() {
  Spectrum sp{{{0.0, 0.0}, {0.0, 0.0}}};
  return make_state(sp, {1.0, 0.0}, {0.9, 0.1});
}

double bisect_quantile(double eps) {
  double lo = -10.0, hi = 10.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (gaussian_cdf(mid) < eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gaussian cdf reference points") {
  REQUIRE_THAT(gaussian_cdf(0.0), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(gaussian_cdf(1.96), WithinAbs(0.9750021048517795, 1e-12));
  for (double x : {0.3, 1.1, 2.7})
    REQUIRE_THAT(gaussian_cdf(-x), WithinAbs(1.0 - gaussian_cdf(x), 1e-15));
}

TEST_CASE("normal quantile inverts the cdf") {
  REQUIRE_THAT(inv_gaussian_cdf(0.5), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(inv_gaussian_cdf(0.975), WithinAbs(1.959963984540054, 1e-10));
  REQUIRE_THAT(inv_gaussian_cdf(0.975), WithinAbs(bisect_quantile(0.975), 1e-10));
  for (double eps : {0.01, 0.05, 0.2, 0.4})
    REQUIRE_THAT(inv_gaussian_cdf(eps), WithinAbs(-inv_gaussian_cdf(1.0 - eps), 1e-10));
  for (int k = 1; k < 1000; ++k) {
    const double eps = k / 1000.0;
    REQUIRE_THAT(gaussian_cdf(inv_gaussian_cdf(eps)), WithinAbs(eps, 1e-10));
  }
  REQUIRE_THAT(gaussian_cdf(inv_gaussian_cdf(1e-9)), WithinAbs(1e-9, 1e-13));
  REQUIRE_THROWS_AS(inv_gaussian_cdf(0.0), std::domain_error);
  REQUIRE_THROWS_AS(inv_gaussian_cdf(1.0), std::domain_error);
  REQUIRE_THROWS_AS(inv_gaussian_cdf(-0.1), std::domain_error);
}

TEST_CASE("second-order expansion at equilibrium") {
  const QCState g = gibbs_state(skewed_coin().spectrum, {1.0, 0.0});
  const SecondOrderExpansion e = normal_approx_dh(g, 5, 0.2);
  REQUIRE_THAT(e.leading, WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(e.correction, WithinAbs(0.0, 1e-15));
  REQUIRE(e.exact);
  REQUIRE_THAT(*e.exact, WithinAbs(-std::log(0.8), 1e-12));
}

TEST_CASE("second-order residual stays logarithmic in n") {
  const QCState r = skewed_coin();
  for (std::size_t n : {10, 25, 50, 100, 200}) {
    const SecondOrderExpansion e = normal_approx_dh(r, n, 0.05);
    REQUIRE(e.exact);
    REQUIRE(e.residual);
    REQUIRE(std::abs(*e.residual) <= 0.75 * std::log(double(n)) + 2.0);
  }
}

TEST_CASE("median error budget drops the correction term") {
  const SecondOrderExpansion e = normal_approx_dh(skewed_coin(), 40, 0.5);
  REQUIRE(e.correction == 0.0);
  REQUIRE(e.exact);
}

TEST_CASE("second-order expansion parameter domain and truncation") {
  const QCState r = skewed_coin();
  REQUIRE_THROWS_AS(normal_approx_dh(r, 0, 0.1), std::domain_error);
  REQUIRE_THROWS_AS(normal_approx_dh(r, 10, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(normal_approx_dh(r, 10, 1.0), std::domain_error);
  const SecondOrderExpansion capped = normal_approx_dh(r, 50, 0.1, 10.0);
  REQUIRE_FALSE(capped.exact);
  REQUIRE_FALSE(capped.residual);
  REQUIRE(capped.leading > 0.0);
}

TEST_CASE("per-copy entropy rate converges at equilibrium") {
  const QCState g = gibbs_state(skewed_coin().spectrum, {1.0, 0.0});
  const auto points = aep_check(g, 0.3, 20);
  REQUIRE(points.size() == 20);
  for (const AepPoint& p : points)
    REQUIRE_THAT(p.value, WithinAbs(-std::log(0.7) / double(p.n), 1e-12));
}

TEST_CASE("per-copy entropy rate approaches the relative entropy") {
  const QCState r = skewed_coin();
  const double d = relative_entropy(r);
  for (double eps : {0.05, 0.3}) {
    const auto points = aep_check(r, eps, 200);
    REQUIRE(points.size() == 200);
    for (const AepPoint& p : points)
      REQUIRE(std::abs(p.value - d) <= aep_envelope(r, eps, p.n));
    const double early = std::abs(points[9].value - d);
    const double late = std::abs(points[199].value - d);
    REQUIRE(late < early);
    REQUIRE(late <= 0.5 * d);
  }
}

TEST_CASE("per-copy sequence truncates at the class cap") {
  testgen::Rng rng(67);
  const QCState r = testgen::random_state(rng, 3);
  const auto points = aep_check(r, 0.2, 100, 10.0);
  REQUIRE(points.size() == 3);  // C(n+2, 2) exceeds 10 at n = 4
}

TEST_CASE("work gaps scale like the second-order coefficient") {
  const QCState r = skewed_coin();
  const double s = rel_entropy_variance(r).stddev;

  SECTION("median budget sends all gaps to zero") {
    const SecondOrderGaps g = second_order_gaps(r, 0.5, 200);
    REQUIRE(std::abs(g.gain_gap) <= 0.25);
    REQUIRE(std::abs(g.cost_gap_lower) <= 0.25);
    REQUIRE(std::abs(g.cost_gap_upper) <= 0.25);
  }

  SECTION("small budget matches s Phi^-1(1-eps)") {
    const SecondOrderGaps g = second_order_gaps(r, 0.05, 200);
    const double target = s * inv_gaussian_cdf(0.95);
    REQUIRE(g.gain_gap > 0.0);
    REQUIRE(std::abs(g.gain_gap - target) <= 0.25 * target);
    REQUIRE(g.cost_gap_upper >= g.cost_gap_lower - 1e-12);
  }

  SECTION("copy count must be positive") {
    REQUIRE_THROWS_AS(second_order_gaps(r, 0.3, 0), std::domain_error);
  }
}
