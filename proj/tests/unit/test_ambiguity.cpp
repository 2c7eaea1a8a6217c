#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "weakeq/ambiguity.hpp"
#include "weakeq/errors.hpp"
#include "weakeq/grid.hpp"

using namespace weakeq;

namespace {
const AssetParams kAsset{0.05, 0.3};
const double kRatio = 0.05 / 0.09;
}  // namespace

TEST_CASE("belief construction") {
  CHECK_THROWS_AS(Belief::from_atoms({{0.1, 0.5}, {0.2, 0.4}}), DomainError);
  CHECK_THROWS_AS(Belief::from_atoms({{-0.1, 0.5}, {0.2, 0.5}}), DomainError);
  CHECK_THROWS_AS(Belief::from_atoms({{0.1, 1.5}, {0.2, -0.5}}), DomainError);
  CHECK_THROWS_AS(Belief::from_atoms({}), DomainError);
  CHECK_THROWS_AS(Belief::quasi_exponential(1.5, 0.1, 0.2), DomainError);
  CHECK(Belief::quasi_exponential(0.5, 0.05, 0.15).support_size() == 2);
  CHECK(Belief::quasi_exponential(0.5, 0.1, 0.1).support_size() == 1);
  CHECK(Belief::quasi_exponential(1.0, 0.05, 0.15).support_size() == 1);
  CHECK(Belief::singleton(0.1).support_size() == 1);
  CHECK(Belief::generalized_hyperbolic(1.0, 1.0).atoms().size() == 64);
}

TEST_CASE("mean_discount") {
  const auto q = Belief::quasi_exponential(0.5, 0.05, 0.15);
  CHECK(mean_discount(q, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mean_discount(q, 10.0) == doctest::Approx(0.414830409930532).epsilon(1e-14));
  CHECK(mean_discount(q, 10.0) == doctest::Approx(0.41483).epsilon(1e-5));

  const auto gh = Belief::generalized_hyperbolic(1.0, 1.0);
  CHECK(hyperbolic_discount(1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(mean_discount(gh, 1.0) - 0.5) < 1e-6);
  CHECK(mean_discount(gh, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double t : {0.1, 0.5, 2.0, 5.0})
    CHECK(std::abs(mean_discount(gh, t) - hyperbolic_discount(1.0, 1.0, t)) < 1e-5);

  const auto gh2 = Belief::generalized_hyperbolic(0.5, 2.0);
  for (double t : {0.25, 1.0, 3.0})
    CHECK(std::abs(mean_discount(gh2, t) - hyperbolic_discount(0.5, 2.0, t)) < 1e-6);

  CHECK_THROWS_AS(mean_discount(q, -1.0), DomainError);
}

TEST_CASE("compact densities") {
  const auto u = Belief::compact([](double) { return 1.0; }, 0.05, 0.15);
  CHECK(belief_mean_rate(u) == doctest::Approx(0.1).epsilon(1e-12));
  // int_{0.05}^{0.15} e^{-b t} db / 0.1 at t = 10
  const double ref = (std::exp(-0.5) - std::exp(-1.5)) / (10 * 0.1);
  CHECK(mean_discount(u, 10.0) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(u.support_size() == 64);
}

TEST_CASE("mean_discount is completely monotone on sampled grids") {
  for (const auto& b : {Belief::quasi_exponential(0.3, 0.02, 0.2),
                        Belief::generalized_hyperbolic(1.0, 1.0),
                        Belief::compact([](double x) { return x; }, 0.01, 0.3)}) {
    const auto ts = linspace(0.0, 40.0, 200);
    double prev_b = 2.0, prev_diff = -1e300;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double b0 = mean_discount(b, ts[i]), b1 = mean_discount(b, ts[i + 1]);
      CHECK(b0 < prev_b);
      const double diff = (b1 - b0) / (ts[i + 1] - ts[i]);
      CHECK(diff < 0.0);
      // Convexity: divided differences increase.
      CHECK(diff >= prev_diff - 1e-15);
      prev_b = b0;
      prev_diff = diff;
    }
  }
}

TEST_CASE("belief_mean_rate") {
  CHECK(belief_mean_rate(Belief::singleton(0.1)) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(belief_mean_rate(Belief::quasi_exponential(0.5, 0.05, 0.15)) ==
        doctest::Approx(0.1).epsilon(1e-15));
  CHECK(std::abs(belief_mean_rate(Belief::generalized_hyperbolic(1.0, 1.0)) - 1.0) < 1e-3);
}

TEST_CASE("candidate_boundary_r") {
  const MarketParams m{0.05, 0.3, 0.1};
  const double th = 2 * 0.1 / 0.05 + 0.05 / 0.09;
  const double r1 = candidate_boundary_r(th, Belief::singleton(0.1), kAsset);
  CHECK(r1 == doctest::Approx(std::exp(1.0 / 0.878048780487805)).epsilon(1e-13));
  CHECK(r1 == doctest::Approx(3.1233).epsilon(1e-4));

  const double r2 = candidate_boundary_r(1.0, Belief::quasi_exponential(0.5, 0.05, 0.15), kAsset);
  CHECK(r2 == doctest::Approx(2.05803764513870).epsilon(1e-12));
  CHECK(r2 == doctest::Approx(2.0581).epsilon(1e-4));
  (void)m;

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 0.5), w(0.0, 1.0), th_d(0.2, 10.0);
  for (int i = 0; i < 100; ++i)
    CHECK(candidate_boundary_r(th_d(gen), Belief::quasi_exponential(w(gen), u(gen), u(gen)),
                               kAsset) > 1.0);
}

TEST_CASE("r decreases when weight moves to the larger exponent") {
  // Shifting mass toward beta2 raises the mean exponent.
  double prev = 1e300;
  for (int i = 0; i <= 20; ++i) {
    const double lambda = 1.0 - 0.05 * i;
    const double r = candidate_boundary_r(1.0, Belief::quasi_exponential(lambda, 0.05, 0.15), kAsset);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("theta_tilde for a singleton is constant") {
  const double th = 2 * 0.1 / 0.05 + 0.05 / 0.09;
  const auto b = Belief::singleton(0.1);
  const double r = candidate_boundary_r(th, b, kAsset);
  for (double x : open_interval_grid(r, 100))
    CHECK(theta_tilde(x, th, r, b, kAsset) == doctest::Approx(th).epsilon(1e-12));
  const auto lim = theta_tilde_limits(th, r, b, kAsset);
  CHECK(lim.at_zero == doctest::Approx(th).epsilon(1e-12));
  CHECK(lim.at_r == doctest::Approx(th).epsilon(1e-12));
}

TEST_CASE("theta_tilde two-point reference") {
  const auto b = Belief::quasi_exponential(0.5, 0.05, 0.15);
  const double r = candidate_boundary_r(1.0, b, kAsset);
  const double a1 = static_cast<double>(oracle::alpha_plus(1.0, 0.05, 0.3, 0.05));
  const double a2 = static_cast<double>(oracle::alpha_plus(1.0, 0.05, 0.3, 0.15));
  CHECK(a1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a2 == doctest::Approx(1.77103135808596).epsilon(1e-13));

  const auto lim = theta_tilde_limits(1.0, r, b, kAsset);
  const double at_r = kRatio * (0.5 * a1 + 0.5 * a2) /
                      (0.5 * a1 * (1 - a1) + 0.5 * a2 * (1 - a2));
  CHECK(lim.at_r == doctest::Approx(at_r).epsilon(1e-9));
  CHECK(lim.at_r == doctest::Approx(-1.12738082306569).epsilon(1e-9));

  // alpha1 = 1 carries no f_xx weight, so the ratio diverges as x -> 0+.
  CHECK(std::isinf(lim.at_zero));
  CHECK(lim.at_zero < 0.0);
  double prev = 0.0;
  for (double x : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double v = theta_tilde(x, 1.0, r, b, kAsset);
    CHECK(v < prev);
    prev = v;
  }
  // Near r the direct ratio approaches the analytic limit.
  CHECK(theta_tilde(r * (1 - 1e-10), 1.0, r, b, kAsset) == doctest::Approx(at_r).epsilon(1e-8));
}

TEST_CASE("theta_tilde endpoint sign pattern matches closed forms") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> beta(0.02, 0.4), lam(0.1, 0.9), th(0.3, 6.0);
  for (int i = 0; i < 100; ++i) {
    const double b1 = beta(gen), b2 = beta(gen), l = lam(gen), t = th(gen);
    const auto b = Belief::quasi_exponential(l, b1, b2);
    const double r = candidate_boundary_r(t, b, kAsset);
    const double a1 = static_cast<double>(oracle::alpha_plus(t, 0.05, 0.3, b1));
    const double a2 = static_cast<double>(oracle::alpha_plus(t, 0.05, 0.3, b2));
    const double amin = std::min(a1, a2);
    const auto lim = theta_tilde_limits(t, r, b, kAsset);
    const double zr = kRatio / (1 - amin);
    const double rr = kRatio * (l * a1 + (1 - l) * a2) /
                      (l * a1 * (1 - a1) + (1 - l) * a2 * (1 - a2));
    if (std::abs(1 - amin) > 1e-6) {
      CHECK(std::abs(lim.at_zero - zr) < 1e-9 * std::max(1.0, std::abs(zr)));
    }
    if (std::abs(l * a1 * (1 - a1) + (1 - l) * a2 * (1 - a2)) > 1e-6) {
      CHECK(std::abs(lim.at_r - rr) < 1e-9 * std::max(1.0, std::abs(rr)));
    }
  }
}

TEST_CASE("theta_tilde domain and degeneracy") {
  const auto b = Belief::singleton(0.05);
  CHECK_THROWS_AS(theta_tilde(0.0, 1.0, 2.0, b, kAsset), DomainError);
  CHECK_THROWS_AS(theta_tilde(2.5, 1.0, 2.0, b, kAsset), DomainError);
  // beta = mu theta makes alpha exactly one: f is linear in x.
  CHECK_THROWS_AS(theta_tilde(1.0, 1.0, 2.0, b, kAsset), DegeneracyError);
}

TEST_CASE("theta_tilde is constant iff the support is a single rate") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> beta(0.02, 0.4), lam(0.05, 0.95), th(0.3, 6.0);
  for (int i = 0; i < 40; ++i) {
    const double t = th(gen);
    const auto single = Belief::singleton(beta(gen));
    const auto rs = exclusion_check(t, single, kAsset);
    CHECK(rs.singleton);
    CHECK_FALSE(rs.exclusion);
    CHECK(rs.grid_range < 1e-9 * std::max(1.0, std::abs(rs.grid_max)));

    double b1 = beta(gen), b2 = beta(gen);
    if (std::abs(b1 - b2) < 0.01) b2 = b1 + 0.05;
    const auto pair = Belief::quasi_exponential(lam(gen), b1, b2);
    const auto rp = exclusion_check(t, pair, kAsset);
    CHECK_FALSE(rp.singleton);
    CHECK(rp.exclusion);
    CHECK((rp.grid_range > 1e-9 || rp.degenerate_points > 0));
  }
}

TEST_CASE("exclusion_check references") {
  const auto two = exclusion_check(1.0, Belief::quasi_exponential(0.5, 0.05, 0.15), kAsset);
  CHECK(two.exclusion);
  CHECK(two.support_size == 2);
  CHECK(two.r == doctest::Approx(2.05803764513870).epsilon(1e-12));
  CHECK(std::isinf(two.endpoint_gap));
  CHECK(two.mean_rate == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(two.d_lower_bound == doctest::Approx(std::exp((0.05 - 0.045) / 0.1)).epsilon(1e-14));

  const double th = 2 * 0.1 / 0.05 + 0.05 / 0.09;
  const auto one = exclusion_check(th, Belief::singleton(0.1), kAsset);
  CHECK_FALSE(one.exclusion);
  CHECK(one.singleton);
  CHECK(one.constant_equilibrium_possible);
  CHECK(one.max_deviation < 1e-9);
  CHECK(one.grid_range < 1e-9);

  const auto same = exclusion_check(th, Belief::quasi_exponential(0.5, 0.1, 0.1), kAsset);
  CHECK(same.singleton);
  CHECK_FALSE(same.exclusion);

  // A continuous belief is never a single rate.
  const auto gh = exclusion_check(2.0, Belief::generalized_hyperbolic(0.05, 0.1), kAsset);
  CHECK(gh.exclusion);
}
