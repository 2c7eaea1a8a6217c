#pragma once

#include <functional>
#include <optional>

namespace weakeq {

/// Black-Scholes type market: stock drift, stock volatility and the
/// subjective discount rate of the agent.
struct MarketParams {
  double mu = 0.05;
  double sigma = 0.3;
  double beta = 0.1;

  /// Throws DomainError unless mu, sigma and beta are all positive and finite.
  void validate() const;
};

/// The stock alone, without a discount rate. Used where the discount rate is
/// itself uncertain.
struct AssetParams {
  double mu = 0.05;
  double sigma = 0.3;

  void validate() const;
  [[nodiscard]] MarketParams with_rate(double beta) const { return {mu, sigma, beta}; }
};

enum class Branch { plus, minus };
enum class BarrierSide { upper, lower };

/// Root of 1/2 sigma^2 theta^2 a(a-1) + mu theta a - beta = 0.
/// The plus branch is the positive root, the minus branch the negative one.
double alpha_exponent(double theta, const MarketParams& market, Branch branch = Branch::plus);

/// E^x[exp(-beta tau)] for the first time the wealth process under the constant
/// proportion theta reaches `barrier`.
double gbm_discounted_hit(double x, double barrier, double theta, const MarketParams& market,
                          BarrierSide side);

struct Derivatives {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline constexpr double kDefaultRelStep = 1e-5;

/// Central differences with absolute step rel_step * max(|x|, 1).
/// Throws NumericError if f throws or returns a non-finite value on the stencil.
Derivatives finite_diff_derivs(const std::function<double(double)>& f, double x,
                               double rel_step = kDefaultRelStep);

/// A scalar function with optional analytic derivatives.
struct SmoothFunction1D {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  [[nodiscard]] bool has_analytic_derivatives() const { return d1 && d2; }
  /// Analytic derivatives when both are present, finite differences otherwise.
  [[nodiscard]] Derivatives evaluate(double x, double rel_step = kDefaultRelStep) const;
};

/// Wealth drift Theta(x) and diffusion Lambda(x) of dX = Theta dt + Lambda dW.
struct ControlledDynamics1D {
  std::function<double(double)> drift;
  std::function<double(double)> diffusion;

  static ControlledDynamics1D constant_proportion(double theta, const MarketParams& market);
};

struct GeneratorValue {
  double value = 0.0;
  bool finite_differences = false;
};

/// -beta f + Theta f' + 1/2 Lambda^2 f''.
GeneratorValue apply_generator(const SmoothFunction1D& f, double x,
                               const ControlledDynamics1D& dynamics, double beta);
GeneratorValue apply_generator(const SmoothFunction1D& f, double x, double theta,
                               const MarketParams& market);

/// Generator of the constant-proportion wealth process applied to known derivatives.
inline double generator_value(const Derivatives& d, double x, double theta,
                              const MarketParams& m) {
  const double vol = m.sigma * theta * x;
  return -m.beta * d.value + m.mu * theta * x * d.d1 + 0.5 * vol * vol * d.d2;
}

}  // namespace weakeq
