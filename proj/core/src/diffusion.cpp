#include "weakeq/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "weakeq/errors.hpp"

namespace weakeq {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

void MarketParams::validate() const {
  if (!positive_finite(mu)) throw DomainError("market: mu must be positive, got " + fmt(mu));
  if (!positive_finite(sigma))
    throw DomainError("market: sigma must be positive, got " + fmt(sigma));
  if (!positive_finite(beta)) throw DomainError("market: beta must be positive, got " + fmt(beta));
}

void AssetParams::validate() const {
  if (!positive_finite(mu)) throw DomainError("asset: mu must be positive, got " + fmt(mu));
  if (!positive_finite(sigma))
    throw DomainError("asset: sigma must be positive, got " + fmt(sigma));
}

double alpha_exponent(double theta, const MarketParams& market, Branch branch) {
  if (!positive_finite(theta))
    throw DomainError("alpha_exponent: theta must be positive, got " + fmt(theta));
  market.validate();

  // A a^2 + B a + C = 0 with C < 0, so the roots have opposite signs.
  const double vol = market.sigma * theta;
  const double A = 0.5 * vol * vol;
  const double B = market.mu * theta - A;
  const double C = -market.beta;
  const double disc = std::sqrt(B * B - 4.0 * A * C);
  const double q = -0.5 * (B + std::copysign(disc, B));
  const double r1 = q / A;
  const double r2 = C / q;
  const double plus = std::max(r1, r2);
  const double minus = std::min(r1, r2);
  return branch == Branch::plus ? plus : minus;
}

double gbm_discounted_hit(double x, double barrier, double theta, const MarketParams& market,
                          BarrierSide side) {
  if (!positive_finite(barrier))
    throw DomainError("gbm_discounted_hit: barrier must be positive, got " + fmt(barrier));
  if (!(x > 0.0)) throw DomainError("gbm_discounted_hit: x must be positive, got " + fmt(x));
  if (side == BarrierSide::upper && x > barrier)
    throw DomainError("gbm_discounted_hit: x=" + fmt(x) + " above upper barrier " + fmt(barrier));
  if (side == BarrierSide::lower && x < barrier)
    throw DomainError("gbm_discounted_hit: x=" + fmt(x) + " below lower barrier " + fmt(barrier));
  const double a = alpha_exponent(theta, market,
                                  side == BarrierSide::upper ? Branch::plus : Branch::minus);
  return std::pow(x / barrier, a);
}

Derivatives finite_diff_derivs(const std::function<double(double)>& f, double x,
                               double rel_step) {
  if (!(rel_step > 0.0))
    throw DomainError("finite_diff_derivs: rel_step must be positive, got " + fmt(rel_step));
  const double h = rel_step * std::max(std::abs(x), 1.0);
  auto eval = [&](double at) {
    double v = 0.0;
    try {
      v = f(at);
    } catch (const std::exception& e) {
      throw NumericError("finite_diff_derivs: evaluation failed at x=" + fmt(at) + ": " +
                         e.what());
    }
    if (!std::isfinite(v))
      throw NumericError("finite_diff_derivs: non-finite value at x=" + fmt(at));
    return v;
  };
  const double fm = eval(x - h);
  const double f0 = eval(x);
  const double fp = eval(x + h);
  return {f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

Derivatives SmoothFunction1D::evaluate(double x, double rel_step) const {
  if (has_analytic_derivatives()) return {value(x), d1(x), d2(x)};
  return finite_diff_derivs(value, x, rel_step);
}

ControlledDynamics1D ControlledDynamics1D::constant_proportion(double theta,
                                                               const MarketParams& market) {
  return {[mu = market.mu, theta](double x) { return mu * theta * x; },
          [sigma = market.sigma, theta](double x) { return sigma * theta * x; }};
}

GeneratorValue apply_generator(const SmoothFunction1D& f, double x,
                               const ControlledDynamics1D& dynamics, double beta) {
  if (!(x > 0.0)) throw DomainError("apply_generator: x must be positive, got " + fmt(x));
  const Derivatives d = f.evaluate(x);
  const double lam = dynamics.diffusion(x);
  const double value = -beta * d.value + dynamics.drift(x) * d.d1 + 0.5 * lam * lam * d.d2;
  if (!std::isfinite(value))
    throw NumericError("apply_generator: non-finite generator at x=" + fmt(x));
  return {value, !f.has_analytic_derivatives()};
}

GeneratorValue apply_generator(const SmoothFunction1D& f, double x, double theta,
                               const MarketParams& market) {
  if (!positive_finite(theta))
    throw DomainError("apply_generator: theta must be positive, got " + fmt(theta));
  return apply_generator(f, x, ControlledDynamics1D::constant_proportion(theta, market),
                         market.beta);
}

}  // namespace weakeq
