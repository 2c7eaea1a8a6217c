#pragma once

// Investment-withdrawal model where realised utility is reduced by a habit
// level depending on the wealth at decision time:
//
//   J(x) = E^x exp(-beta tau) (1 - exp(-a [X_tau - h(x) - k]))
//
// The constant-proportion candidate (theta*, (0, x*)) is solved in closed form
// up to the scalar root x* of the smooth-fit equation.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "weakeq/diffusion.hpp"
#include "weakeq/report.hpp"

namespace weakeq {

struct PreferenceParams {
  double a = 0.7;  // risk aversion
  double k = 0.7;  // utility shift

  void validate() const;
};

struct HabitSpec {
  enum class Kind { linear, custom };

  std::function<double(double)> h;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  Kind kind = Kind::custom;
  double slope = 0.0;  // meaningful for Kind::linear

  static HabitSpec linear(double slope);
  static HabitSpec none() { return linear(0.0); }
};

/// Checks h(0) = 0 and 0 <= h' <= 1 on `samples` points of [0, x_max].
void validate_habit(const HabitSpec& habit, double x_max, std::size_t samples = 200);

/// g(x, y) = 1 - exp(-a [x - h(y) - k]).
double payoff_g(double x, double y, const PreferenceParams& prefs, const HabitSpec& habit);
/// g and its first two derivatives in x with y frozen.
Derivatives payoff_g_derivs(double x, double y, const PreferenceParams& prefs,
                            const HabitSpec& habit);

/// theta* = 2 beta / mu + mu / sigma^2.
double equilibrium_theta(const MarketParams& market);

/// psi(x) = -alpha + (a x + alpha) exp(-a (x - h(x) - k)).
double smooth_fit_residual(double x, double alpha, const PreferenceParams& prefs,
                           const HabitSpec& habit);

/// Unique positive root of psi, by bisection. Throws NoRootError when no sign
/// change is found below 2^15 / a.
double solve_threshold(double alpha, const PreferenceParams& prefs, const HabitSpec& habit);

struct HabitEquilibrium {
  double theta_star = 0.0;
  double alpha = 0.0;
  double x_star = 0.0;
  double x0_star = 0.0;  // threshold for h == 0
  MarketParams market;
  PreferenceParams prefs;
  HabitSpec habit;
};

HabitEquilibrium solve_habit_equilibrium(const MarketParams& market,
                                         const PreferenceParams& prefs,
                                         const HabitSpec& habit);

/// Same bundle with a different stopping boundary; theta*, alpha and x0* unchanged.
HabitEquilibrium with_boundary(HabitEquilibrium eq, double x_star);

/// Withdrawal threshold when the investment proportion is locked at `theta`.
struct LockedThreshold {
  double theta = 0.0;
  double alpha = 0.0;
  double x_star = 0.0;
};
LockedThreshold solve_locked_threshold(double theta, const MarketParams& market,
                                       const PreferenceParams& prefs, const HabitSpec& habit);

/// Auxiliary function: (x/x*)^alpha g(x*, y) on (0, x*), g(x, y) on [x*, inf).
double aux_f(double x, double y, const HabitEquilibrium& eq);
Derivatives aux_f_derivs(double x, double y, const HabitEquilibrium& eq);

inline constexpr std::size_t kDefaultConditionGrid = 400;
inline constexpr double kInequalityTol = 1e-9;

/// Sign test of F(x) = x^a (1 - e^{-a(x* - h(x) - k)}) - x*^a (1 - e^{-a(x - h(x) - k)})
/// on the open grid of (0, x*). Item id "fgeqg".
ConditionReport check_value_dominance(const HabitEquilibrium& eq,
                                      std::size_t grid_n = kDefaultConditionGrid);

struct SufficientConditions {
  ConditionReport report;
  std::array<double, 3> m_terms{};
  double m_bound = 0.0;       // min of m_terms
  double sup_h_prime = 0.0;   // over the grid of (0, x*)
  double x0_lower = 0.0;      // (2 - alpha) / a
  double x1_bar = 0.0;
  double x2_bar = 0.0;
};

/// Sufficient conditions for value dominance and for the D-side generator
/// inequalities. Items: x0assumption, x0assumption_equiv, hassumption1,
/// hassumption2, xstarcond.
SufficientConditions check_sufficient_conditions(const HabitEquilibrium& eq,
                                                 std::size_t grid_n = kDefaultConditionGrid);

enum class SweepAxis { mu, sigma };

struct SweepPoint {
  double param = 0.0;
  double theta_star = 0.0;
  double alpha = 0.0;
  double x_star = 0.0;
  double x0_star = 0.0;
  double m_bound = 0.0;
  double x0_lower = 0.0;  // (2 - alpha) / a, compare with x0_star
};

/// Re-solves the equilibrium for `steps` equally spaced values of mu or sigma.
/// steps == 1 requires from == to.
std::vector<SweepPoint> sweep_threshold(SweepAxis axis, double from, double to, std::size_t steps,
                                        const MarketParams& base, const PreferenceParams& prefs,
                                        const HabitSpec& habit);

/// Header `param,theta_star,alpha,x_star,x0_star,M_bound`, values as %.10g.
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

}  // namespace weakeq
