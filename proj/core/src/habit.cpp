#include "weakeq/habit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "weakeq/errors.hpp"
#include "weakeq/grid.hpp"

namespace weakeq {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

constexpr double kBracketLo = 1e-8;
constexpr double kBisectTol = 1e-12;

}  // namespace

void PreferenceParams::validate() const {
  if (!(std::isfinite(a) && a > 0.0)) throw DomainError("prefs: a must be positive, got " + fmt(a));
  if (!(std::isfinite(k) && k > 0.0)) throw DomainError("prefs: k must be positive, got " + fmt(k));
}

HabitSpec HabitSpec::linear(double slope) {
  HabitSpec spec;
  spec.h = [slope](double x) { return slope * x; };
  spec.d1 = [slope](double) { return slope; };
  spec.d2 = [](double) { return 0.0; };
  spec.kind = Kind::linear;
  spec.slope = slope;
  return spec;
}

void validate_habit(const HabitSpec& habit, double x_max, std::size_t samples) {
  if (!habit.h || !habit.d1 || !habit.d2)
    throw DomainError("habit: h, h' and h'' must all be provided");
  if (std::abs(habit.h(0.0)) > 1e-12) throw DomainError("habit: h(0) must be 0");
  for (double x : linspace(0.0, x_max, std::max<std::size_t>(samples, 2))) {
    const double slope = habit.d1(x);
    if (!(slope >= -1e-12 && slope <= 1.0 + 1e-12))
      throw DomainError("habit: h'(" + fmt(x) + ") = " + fmt(slope) + " outside [0, 1]");
  }
}

namespace {
void check_state(const char* who, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw DomainError(std::string(who) + ": need x > 0 and y > 0, got x=" + fmt(x) + ", y=" + fmt(y));
}
}  // namespace

double payoff_g(double x, double y, const PreferenceParams& prefs, const HabitSpec& habit) {
  check_state("payoff_g", x, y);
  return 1.0 - std::exp(-prefs.a * (x - habit.h(y) - prefs.k));
}

Derivatives payoff_g_derivs(double x, double y, const PreferenceParams& prefs,
                            const HabitSpec& habit) {
  check_state("payoff_g", x, y);
  const double e = std::exp(-prefs.a * (x - habit.h(y) - prefs.k));
  return {1.0 - e, prefs.a * e, -prefs.a * prefs.a * e};
}

double equilibrium_theta(const MarketParams& market) {
  market.validate();
  return 2.0 * market.beta / market.mu + market.mu / (market.sigma * market.sigma);
}

double smooth_fit_residual(double x, double alpha, const PreferenceParams& prefs,
                           const HabitSpec& habit) {
  return -alpha + (prefs.a * x + alpha) * std::exp(-prefs.a * (x - habit.h(x) - prefs.k));
}

double solve_threshold(double alpha, const PreferenceParams& prefs, const HabitSpec& habit) {
  prefs.validate();
  if (!(alpha > 0.0)) throw DomainError("solve_threshold: alpha must be positive, got " + fmt(alpha));
  auto psi = [&](double x) { return smooth_fit_residual(x, alpha, prefs, habit); };

  double lo = kBracketLo;
  if (!(psi(lo) > 0.0))
    throw NoRootError("solve_threshold: psi(" + fmt(lo) + ") is not positive");
  const double cap = std::ldexp(1.0, 15) / prefs.a;
  double hi = 10.0 / prefs.a;
  while (!(psi(hi) < 0.0)) {
    hi *= 2.0;
    if (hi > cap)
      throw NoRootError("solve_threshold: psi has no sign change below " + fmt(cap) +
                        "; habit outside the admissible class?");
  }
  for (int it = 0; it < 200 && hi - lo > kBisectTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 0.0 ? lo : hi) = mid;
  }
  // The endpoint with the smaller residual; both are within 1e-12 of the root.
  return std::abs(psi(lo)) <= std::abs(psi(hi)) ? lo : hi;
}

HabitEquilibrium solve_habit_equilibrium(const MarketParams& market,
                                         const PreferenceParams& prefs,
                                         const HabitSpec& habit) {
  market.validate();
  prefs.validate();
  validate_habit(habit, 20.0 / prefs.a);
  HabitEquilibrium eq;
  eq.market = market;
  eq.prefs = prefs;
  eq.habit = habit;
  eq.theta_star = equilibrium_theta(market);
  eq.alpha = alpha_exponent(eq.theta_star, market);
  eq.x_star = solve_threshold(eq.alpha, prefs, habit);
  eq.x0_star = solve_threshold(eq.alpha, prefs, HabitSpec::none());
  return eq;
}

HabitEquilibrium with_boundary(HabitEquilibrium eq, double x_star) {
  if (!(x_star > 0.0)) throw DomainError("with_boundary: x* must be positive");
  eq.x_star = x_star;
  return eq;
}

LockedThreshold solve_locked_threshold(double theta, const MarketParams& market,
                                       const PreferenceParams& prefs, const HabitSpec& habit) {
  LockedThreshold out;
  out.theta = theta;
  out.alpha = alpha_exponent(theta, market);
  out.x_star = solve_threshold(out.alpha, prefs, habit);
  return out;
}

Derivatives aux_f_derivs(double x, double y, const HabitEquilibrium& eq) {
  check_state("aux_f", x, y);
  if (x >= eq.x_star) return payoff_g_derivs(x, y, eq.prefs, eq.habit);
  const double v = std::pow(x / eq.x_star, eq.alpha) * payoff_g(eq.x_star, y, eq.prefs, eq.habit);
  return {v, eq.alpha * v / x, eq.alpha * (eq.alpha - 1.0) * v / (x * x)};
}

double aux_f(double x, double y, const HabitEquilibrium& eq) { return aux_f_derivs(x, y, eq).value; }

ConditionReport check_value_dominance(const HabitEquilibrium& eq, std::size_t grid_n) {
  if (grid_n < 2) throw DomainError("check_value_dominance: grid_n must be at least 2");
  const auto& p = eq.prefs;
  const double xs = eq.x_star;
  const double xs_pow = std::pow(xs, eq.alpha);
  double worst = std::numeric_limits<double>::infinity();
  double at = 0.0;
  for (double x : open_interval_grid(xs, grid_n)) {
    const double hx = eq.habit.h(x);
    const double F = std::pow(x, eq.alpha) * (1.0 - std::exp(-p.a * (xs - hx - p.k))) -
                     xs_pow * (1.0 - std::exp(-p.a * (x - hx - p.k)));
    if (F < worst) {
      worst = F;
      at = x;
    }
  }
  ConditionReport report;
  report.items.push_back({"fgeqg", at, worst, worst >= -kInequalityTol,
                          worst >= -kInequalityTol ? "" : "f < g inside the continuation region"});
  return report;
}

SufficientConditions check_sufficient_conditions(const HabitEquilibrium& eq, std::size_t grid_n) {
  const auto& m = eq.market;
  const auto& p = eq.prefs;
  const double al = eq.alpha;
  SufficientConditions out;

  out.x0_lower = (2.0 - al) / p.a;
  const double x0_margin = eq.x0_star - out.x0_lower;
  out.report.items.push_back({"x0assumption", std::nullopt, x0_margin, x0_margin > 0.0, ""});
  const double two_exp = 2.0 * std::exp(al - 2.0 + p.a * p.k);
  out.report.items.push_back(
      {"x0assumption_equiv", std::nullopt, two_exp - al, two_exp > al, "2 e^{alpha-2+ak} > alpha"});

  double max_h2 = -std::numeric_limits<double>::infinity();
  double at_h2 = 0.0;
  double sup_h1 = -std::numeric_limits<double>::infinity();
  double at_h1 = 0.0;
  for (double x : open_interval_grid(eq.x_star, grid_n)) {
    if (const double v = eq.habit.d2(x); v > max_h2) {
      max_h2 = v;
      at_h2 = x;
    }
    if (const double v = eq.habit.d1(x); v > sup_h1) {
      sup_h1 = v;
      at_h1 = x;
    }
  }
  out.report.items.push_back({"hassumption1", at_h2, -max_h2, -max_h2 >= -kInequalityTol, ""});

  out.m_terms[0] = 1.0 / (2.0 * (1.0 + 1.0 / (p.a * eq.x0_star + al - 1.0)));
  out.m_terms[1] = 1.0 / (1.0 - std::exp(-p.a * eq.x_star)) *
                   (1.0 - al / std::min(al * std::exp(p.a * p.k), two_exp));
  out.m_terms[2] = 0.5;
  out.m_bound = *std::min_element(out.m_terms.begin(), out.m_terms.end());
  out.sup_h_prime = sup_h1;
  out.report.items.push_back({"hassumption2", at_h1, out.m_bound - sup_h1, sup_h1 < out.m_bound,
                              "sup h' < M(theta*)"});

  const double theta = eq.theta_star;
  const double s2 = m.sigma * m.sigma;
  out.x1_bar = 2.0 * m.mu / (s2 * theta * p.a);
  out.x2_bar = m.mu * m.mu * al / (2.0 * m.beta * s2 * p.a);
  const double xstar_margin = eq.x_star - std::min(out.x1_bar, out.x2_bar);
  out.report.items.push_back(
      {"xstarcond", std::nullopt, xstar_margin, xstar_margin >= -kInequalityTol, ""});
  return out;
}

std::vector<SweepPoint> sweep_threshold(SweepAxis axis, double from, double to, std::size_t steps,
                                        const MarketParams& base, const PreferenceParams& prefs,
                                        const HabitSpec& habit) {
  if (steps == 0) throw DomainError("sweep: steps must be positive");
  if (steps == 1 ? from != to : !(from < to))
    throw DomainError("sweep: need from < to with steps >= 2, or from == to with steps == 1");
  std::vector<SweepPoint> out;
  out.reserve(steps);
  for (double v : linspace(from, to, steps)) {
    MarketParams market = base;
    (axis == SweepAxis::mu ? market.mu : market.sigma) = v;
    try {
      const auto eq = solve_habit_equilibrium(market, prefs, habit);
      const auto sc = check_sufficient_conditions(eq);
      out.push_back({v, eq.theta_star, eq.alpha, eq.x_star, eq.x0_star, sc.m_bound, sc.x0_lower});
    } catch (const Error& e) {
      throw NoRootError(std::string("sweep: failed at ") + (axis == SweepAxis::mu ? "mu" : "sigma") +
                        "=" + fmt(v) + ": " + e.what());
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "param,theta_star,alpha,x_star,x0_star,M_bound\n";
  for (const auto& p : points) {
    out << fmt(p.param) << ',' << fmt(p.theta_star) << ',' << fmt(p.alpha) << ',' << fmt(p.x_star)
        << ',' << fmt(p.x0_star) << ',' << fmt(p.m_bound) << '\n';
  }
}

}  // namespace weakeq
