#pragma once

// Monte Carlo probes of the weak-equilibrium conditions on simulated wealth
// paths dX = mu u(X) X dt + sigma u(X) X dW, monitored on the time grid k*dt.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "weakeq/diffusion.hpp"
#include "weakeq/habit.hpp"

namespace weakeq {

struct McConfig {
  std::size_t paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  std::optional<double> t_max;  // default ln(1e8) / beta
  // Brownian-bridge crossing test within each step; exits are then stopped
  // on the barrier (continuous monitoring up to O(dt) in time).
  bool bridge_correction = false;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
  [[nodiscard]] double horizon(double beta) const;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double truncated_fraction = 0.0;
};

/// Investment proportion, either constant or state dependent.
class Control {
 public:
  static Control constant(double u);
  static Control feedback(std::function<double(double)> u);

  [[nodiscard]] bool is_constant() const { return !fn_; }
  [[nodiscard]] double operator()(double x) const { return fn_ ? fn_(x) : value_; }

 private:
  double value_ = 0.0;
  std::function<double(double)> fn_;
};

/// Open interval (lo, hi); lo = 0 and hi = inf are allowed.
struct Region {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool contains(double x) const { return x > lo && x < hi; }
};

using PayoffFn = std::function<double(double, double)>;  // (X_tau, y)

/// E^{x0}[exp(-beta tau) payoff(X_tau, y)], tau the first grid time at which X
/// leaves `region`. Paths still running at t_max contribute 0.
McEstimate simulate_stopped_payoff(double x0, double y, const Control& control,
                                   const Region& region, const PayoffFn& payoff,
                                   const MarketParams& market, const McConfig& cfg);

/// Everything the probes need about a candidate equilibrium.
struct EquilibriumBundle {
  MarketParams market;
  Control control_hat = Control::constant(1.0);
  double boundary = 0.0;  // C = (0, boundary)
  PayoffFn payoff;
  PayoffFn aux;  // closed-form auxiliary function f(x, y)
};

EquilibriumBundle make_habit_bundle(const HabitEquilibrium& eq);

/// How the value after the perturbation window is obtained.
enum class Continuation {
  analytic,   // exp(-beta eps) f(X_eps, x0) from the closed-form auxiliary function
  simulated,  // keep simulating under u_hat until exit or t_max
};

struct ProbePoint {
  double eps = 0.0;
  double slope = 0.0;
  double std_error = 0.0;
};

struct ProbeResult {
  std::vector<ProbePoint> points;
  double intercept = 0.0;
  double intercept_stderr = 0.0;
};

inline const std::vector<double>& default_eps_list() {
  static const std::vector<double> eps{0.2, 0.1, 0.05, 0.025, 0.0125};
  return eps;
}

/// Slope (J(u on [0, eps), u_hat after) - f(x0, x0)) / eps for each eps, with
/// exit from C monitored throughout.
ProbeResult control_perturbation_probe(double x0, const EquilibriumBundle& bundle, double u,
                                       std::span<const double> eps_list, const McConfig& cfg,
                                       Continuation continuation = Continuation::analytic);

/// Slope (J(no stopping before eps) - J(stop now or continue)) / eps, where the
/// baseline is g(x0, x0) for x0 in D and f(x0, x0) for x0 in C.
ProbeResult stop_delay_probe(double x0, const EquilibriumBundle& bundle,
                             std::span<const double> eps_list, const McConfig& cfg,
                             Continuation continuation = Continuation::analytic);

/// J(x0; u_hat, tau_hat) - g(x0, x0).
McEstimate immediate_stop_gap(double x0, const EquilibriumBundle& bundle, const McConfig& cfg);

/// Weighted least squares of slope on eps; returns (intercept, stderr).
std::pair<double, double> extrapolate_intercept(std::span<const ProbePoint> points);

/// `eps,slope,stderr` rows followed by an `intercept,intercept_stderr` record.
void write_probe_csv(std::ostream& out, const ProbeResult& result);

/// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace weakeq
