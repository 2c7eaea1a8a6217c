#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "weakeq/diffusion.hpp"
#include "weakeq/errors.hpp"
#include "weakeq/habit.hpp"

using namespace weakeq;

namespace {
const MarketParams kMarket{0.05, 0.3, 0.1};
const double kThetaStar = 2 * 0.1 / 0.05 + 0.05 / 0.09;
}  // namespace

TEST_CASE("alpha_exponent matches the quadratic formula oracle") {
  const double a = alpha_exponent(kThetaStar, kMarket);
  CHECK(a == doctest::Approx(static_cast<double>(oracle::alpha_plus(kThetaStar, 0.05, 0.3, 0.1)))
                 .epsilon(1e-14));
  CHECK(a == doctest::Approx(0.87805).epsilon(1e-5));
  // alpha(theta*) = 2 beta / (2 beta + mu^2 / sigma^2)
  CHECK(a == doctest::Approx(0.2 / (0.2 + 0.0025 / 0.09)).epsilon(1e-14));

  CHECK(alpha_exponent(1.0, {0.5, 1.0, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(alpha_exponent(1.0, kMarket) == doctest::Approx(1.43619128689973).epsilon(1e-12));
  CHECK(alpha_exponent(1.0, kMarket, Branch::minus) ==
        doctest::Approx(static_cast<double>(oracle::alpha_minus(1.0, 0.05, 0.3, 0.1)))
            .epsilon(1e-13));
}

TEST_CASE("alpha_exponent rejects non-positive theta") {
  CHECK_THROWS_AS(alpha_exponent(0.0, kMarket), DomainError);
  CHECK_THROWS_AS(alpha_exponent(-1.0, kMarket), DomainError);
  CHECK_THROWS_AS(alpha_exponent(1.0, {0.05, 0.0, 0.1}), DomainError);
}

TEST_CASE("alpha roots the characteristic quadratic on random parameters") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> mu(0.01, 0.3), sig(0.05, 0.8), beta(0.001, 0.5),
      theta(0.05, 20.0);
  for (int i = 0; i < 500; ++i) {
    const MarketParams m{mu(gen), sig(gen), beta(gen)};
    const double th = theta(gen);
    for (auto br : {Branch::plus, Branch::minus}) {
      const double a = alpha_exponent(th, m, br);
      const double q = 0.5 * m.sigma * m.sigma * th * th * a * (a - 1) + m.mu * th * a - m.beta;
      CHECK(std::abs(q) < 1e-12);
      CHECK((br == Branch::plus ? a > 0 : a < 0));
    }
  }
}

TEST_CASE("stable root survives beta much smaller than sigma^2 theta^2") {
  // Here the positive root is ~ beta / (mu - sigma^2 / 2); the textbook formula
  // loses about ten digits to cancellation.
  const MarketParams m{0.05, 0.3, 1e-14};
  const double a = alpha_exponent(1.0, m);
  const double A = 0.5 * 0.09, B = 0.05 - A;
  const double series = 1e-14 / B - A * 1e-28 / (B * B * B);
  CHECK(a == doctest::Approx(series).epsilon(1e-12));
  CHECK(std::abs(A * a * a + B * a - 1e-14) < 1e-12 * 1e-14);
}

TEST_CASE("alpha_plus increases with beta") {
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double a = alpha_exponent(kThetaStar, {0.05, 0.3, 0.02 * i});
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("gbm_discounted_hit") {
  CHECK(gbm_discounted_hit(2.0, 2.0, 3.0, kMarket, BarrierSide::upper) == 1.0);
  CHECK(gbm_discounted_hit(2.0, 2.0, 3.0, kMarket, BarrierSide::lower) == 1.0);
  const double v = gbm_discounted_hit(1.0, 2.7419, kThetaStar, kMarket, BarrierSide::upper);
  CHECK(v == doctest::Approx(0.412448108899685).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.41243).epsilon(1e-4));
  CHECK(gbm_discounted_hit(1e-12, 2.0, kThetaStar, kMarket, BarrierSide::upper) < 1e-9);
  CHECK_THROWS_AS(gbm_discounted_hit(3.0, 2.0, 1.0, kMarket, BarrierSide::upper), DomainError);
  CHECK_THROWS_AS(gbm_discounted_hit(1.0, 2.0, 1.0, kMarket, BarrierSide::lower), DomainError);
  CHECK_THROWS_AS(gbm_discounted_hit(0.0, 2.0, 1.0, kMarket, BarrierSide::upper), DomainError);
}

TEST_CASE("gbm_discounted_hit is monotone and inside (0, 1]") {
  double prev = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double v = gbm_discounted_hit(0.05 * i, 2.5, 2.0, kMarket, BarrierSide::upper);
    CHECK(v > prev);
    CHECK(v <= 1.0);
    prev = v;
  }
  prev = 2.0;
  for (int i = 0; i < 50; ++i) {
    const double v = gbm_discounted_hit(1.0 + 0.1 * i, 1.0, 2.0, kMarket, BarrierSide::lower);
    CHECK(v < prev);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("finite_diff_derivs") {
  auto sq = finite_diff_derivs([](double x) { return x * x; }, 2.0);
  CHECK(sq.value == 4.0);
  CHECK(sq.d1 == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(std::abs(sq.d2 - 2.0) < 1e-4);

  auto ex = finite_diff_derivs([](double x) { return std::exp(x); }, 0.0);
  CHECK(std::abs(ex.value - 1.0) < 1e-6);
  CHECK(std::abs(ex.d1 - 1.0) < 1e-6);
  CHECK(std::abs(ex.d2 - 1.0) < 1e-5);

  auto pw = finite_diff_derivs([](double x) { return std::pow(x, 0.87805); }, 1.0);
  CHECK(std::abs(pw.d1 - 0.87805) < 1e-5);
  CHECK(std::abs(pw.d2 - 0.87805 * (0.87805 - 1.0)) < 1e-5);

  CHECK_THROWS_AS(finite_diff_derivs([](double x) { return std::log(x); }, 1e-7), NumericError);
  CHECK_THROWS_AS(finite_diff_derivs([](double x) { return x; }, 1.0, 0.0), DomainError);
}

TEST_CASE("apply_generator") {
  const double a = alpha_exponent(kThetaStar, kMarket);
  SmoothFunction1D power{[a](double x) { return std::pow(x, a); },
                         [a](double x) { return a * std::pow(x, a - 1); },
                         [a](double x) { return a * (a - 1) * std::pow(x, a - 2); }};
  for (int i = 1; i <= 100; ++i) {
    const auto r = apply_generator(power, 0.1 * i, kThetaStar, kMarket);
    CHECK(std::abs(r.value) < 1e-9 * std::max(1.0, std::pow(0.1 * i, a)));
    CHECK_FALSE(r.finite_differences);
  }

  SmoothFunction1D constant{[](double) { return 2.5; }, {}, {}};
  const auto c = apply_generator(constant, 1.7, 3.0, kMarket);
  CHECK(c.value == doctest::Approx(-0.25).epsilon(1e-9));
  CHECK(c.finite_differences);

  CHECK_THROWS_AS(apply_generator(constant, 0.0, 3.0, kMarket), DomainError);
  CHECK_THROWS_AS(apply_generator(constant, 1.0, 0.0, kMarket), DomainError);
}

TEST_CASE("apply_generator on the auxiliary function in the stopping region") {
  const auto eq = solve_habit_equilibrium(kMarket, {0.7, 0.7}, HabitSpec::linear(0.15));
  SmoothFunction1D f{[&](double x) { return aux_f(x, 3.0, eq); },
                     [&](double x) { return aux_f_derivs(x, 3.0, eq).d1; },
                     [&](double x) { return aux_f_derivs(x, 3.0, eq).d2; }};
  const auto analytic = apply_generator(f, 3.0, eq.theta_star, kMarket);
  // mpmath, 30 digits: -beta g + mu th x g_x + 1/2 s^2 th^2 x^2 g_xx at g=0.726102...
  CHECK(analytic.value == doctest::Approx(-1.06963039448416).epsilon(1e-11));
  CHECK(std::abs(analytic.value - -1.0695) < 2e-4);

  SmoothFunction1D fd{f.value, {}, {}};
  const auto numeric = apply_generator(fd, 3.0, eq.theta_star, kMarket);
  CHECK(numeric.finite_differences);
  CHECK(numeric.value == doctest::Approx(analytic.value).epsilon(1e-4));
}

TEST_CASE("finite differences of the auxiliary function match analytic derivatives inside C") {
  const auto eq = solve_habit_equilibrium(kMarket, {0.7, 0.7}, HabitSpec::linear(0.15));
  for (int i = 1; i < 20; ++i) {
    const double x = eq.x_star * i / 20.0;
    const auto an = aux_f_derivs(x, 1.0, eq);
    auto f = [&](double z) { return aux_f(z, 1.0, eq); };
    const auto fd = finite_diff_derivs(f, x);
    CHECK(fd.d1 == doctest::Approx(an.d1).epsilon(1e-5));
    // Second differences need a wider stencil to keep rounding below 1e-5.
    const auto fd2 = finite_diff_derivs(f, x, 1e-3);
    CHECK(fd2.d2 == doctest::Approx(an.d2).epsilon(1e-5));
  }
}

TEST_CASE("ControlledDynamics1D constant proportion") {
  const auto dyn = ControlledDynamics1D::constant_proportion(2.0, kMarket);
  CHECK(dyn.drift(3.0) == doctest::Approx(0.05 * 2 * 3));
  CHECK(dyn.diffusion(3.0) == doctest::Approx(0.3 * 2 * 3));
}
