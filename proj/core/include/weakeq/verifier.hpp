#pragma once

// Grid verifier for the time-homogeneous extended HJB system of a
// one-dimensional stopping-control candidate (u_hat, C = (0, x*)):
//
//   G1     A^{u_hat} f(x, y) = 0               x in C, all y
//   G2     sup_u A^u f(x, x) = 0               x in C (attained at u_hat)
//   G_PLUS A^{u_hat} g(x, x) <= 0              x in int(D)
//   G9     A^{u_hat} g(x, x*) <= 0             x in int(D)
//   SS     f_x(x*, x*) = g_x(x*, x*)
//   G5     f(x, y) = g(x, y)                   x in D, all y
//   G6     f(x, x) >= g(x, x)                  all x
//
// A^u is the discounted generator of dX = mu u X dt + sigma u X dW.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "weakeq/diffusion.hpp"
#include "weakeq/habit.hpp"

namespace weakeq {

/// (x, y) -> value and x-derivatives with y frozen.
using BivariateFn = std::function<Derivatives(double, double)>;

struct ControlDomain {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  [[nodiscard]] bool unbounded() const { return hi == std::numeric_limits<double>::infinity(); }
};

struct CandidateProblem {
  BivariateFn payoff;
  BivariateFn aux;
  std::function<double(double)> control_hat;
  double boundary = 0.0;  // C = (0, boundary)
  MarketParams market;
  ControlDomain control_domain;
};

CandidateProblem make_habit_problem(const HabitEquilibrium& eq);

struct VerifierOptions {
  std::size_t grid_c = 400;
  std::size_t grid_d = 400;
  std::size_t grid_y = 50;
  double tol = 1e-6;
  double ss_tol = 1e-8;
  double d_extent = 5.0;  // D is truncated to [x*(1 + 1/grid_d), d_extent x*]
};

struct ConditionResult {
  std::string id;
  double worst = 0.0;
  double at = 0.0;
  std::optional<double> at_y;
  bool pass = true;
  std::string flag;  // e.g. "unbounded_hamiltonian"
};

struct VerificationReport {
  std::vector<ConditionResult> conditions;
  bool overall = true;
  VerifierOptions options;
  double boundary = 0.0;
  double d_truncation = 0.0;
  /// max |A^{u_hat} f(x, x)| over the C-grid; G1 at y = x plus G2 force zero.
  double diagonal_identity = 0.0;

  [[nodiscard]] const ConditionResult* find(const std::string& id) const;
};

VerificationReport verify_system(const CandidateProblem& problem,
                                 const VerifierOptions& options = {});

/// f_x(x*-, x*) - g_x(x*, x*), with f differentiated from inside C.
double check_smooth_fitting(const CandidateProblem& problem);

/// Maximiser of the quadratic map u -> A^u f(x, x) given the derivatives of
/// f(., x) at x. Empty when f_xx >= 0 (no interior maximum).
std::optional<double> hamiltonian_argmax(const Derivatives& f, double x,
                                         const MarketParams& market);

}  // namespace weakeq
