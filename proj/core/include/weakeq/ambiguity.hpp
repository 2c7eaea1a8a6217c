#pragma once

// Investment-withdrawal with an ambiguous discount rate. The agent averages
// exponential discounting over a belief p(beta); the mean discount function
// B(t) = int exp(-beta t) p(beta) dbeta is then non-exponential and the
// problem is time inconsistent.

#include <cstddef>
#include <functional>
#include <vector>

#include "weakeq/diffusion.hpp"

namespace weakeq {

struct RateAtom {
  double rate = 0.0;
  double weight = 0.0;
};

/// Discrete belief over discount rates. Continuous densities are represented
/// by their quadrature nodes.
class Belief {
 public:
  /// Validates positivity and that weights sum to one within 1e-12.
  static Belief from_atoms(std::vector<RateAtom> atoms);
  static Belief singleton(double rate);
  /// lambda on beta1, 1 - lambda on beta2.
  static Belief quasi_exponential(double lambda, double beta1, double beta2);
  /// Gamma(shape b/a, scale a) density, B(t) = (1 + a t)^{-b/a}.
  static Belief generalized_hyperbolic(double a, double b, std::size_t nodes = 64);
  /// Arbitrary density on [lo, hi]; weights are renormalised.
  static Belief compact(const std::function<double(double)>& density, double lo, double hi,
                        std::size_t nodes = 64);

  [[nodiscard]] const std::vector<RateAtom>& atoms() const { return atoms_; }
  /// Number of distinct rates (relative tolerance 1e-12).
  [[nodiscard]] std::size_t support_size() const;

 private:
  explicit Belief(std::vector<RateAtom> atoms) : atoms_(std::move(atoms)) {}
  std::vector<RateAtom> atoms_;
};

double mean_discount(const Belief& belief, double t);
/// Closed form of the generalized hyperbolic mean discount function.
double hyperbolic_discount(double a, double b, double t);
double belief_mean_rate(const Belief& belief);

/// r = exp(1 / sum_i w_i alpha_+(theta, beta_i)), the right end of the
/// continuation interval (0, r) forced by smooth fitting of log x.
double candidate_boundary_r(double theta, const Belief& belief, const AssetParams& asset);

/// argmax over controls of the generator applied to the auxiliary function at
/// (x, x): -mu f_x / (sigma^2 x f_xx). Throws DegeneracyError when f_xx
/// vanishes relative to f_x.
double theta_tilde(double x, double theta, double r, const Belief& belief,
                   const AssetParams& asset);

struct ThetaTildeLimits {
  double at_zero = 0.0;  // x -> 0+, may be +-infinity
  double at_r = 0.0;     // x -> r-
};
ThetaTildeLimits theta_tilde_limits(double theta, double r, const Belief& belief,
                                    const AssetParams& asset);

struct ExclusionReport {
  double theta = 0.0;
  double r = 0.0;
  std::size_t support_size = 0;
  ThetaTildeLimits limits;
  double endpoint_gap = 0.0;  // |theta~(0+) - theta~(r-)|
  double grid_min = 0.0;
  double grid_max = 0.0;
  double grid_range = 0.0;
  double max_deviation = 0.0;  // max |theta~(x) - theta| over grid and endpoints
  std::size_t degenerate_points = 0;
  double mean_rate = 0.0;
  double d_lower_bound = 0.0;  // stopping states must exceed this
  bool singleton = false;
  bool exclusion = false;
  bool constant_equilibrium_possible = false;
};

inline constexpr double kNonConstancyTol = 1e-6;

ExclusionReport exclusion_check(double theta, const Belief& belief, const AssetParams& asset,
                                std::size_t grid_n = 100);

}  // namespace weakeq
