#include "weakeq/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/gamma.hpp>

#include "weakeq/errors.hpp"
#include "weakeq/grid.hpp"
#include "weakeq/quadrature.hpp"

namespace weakeq {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

constexpr double kTailMass = 1e-10;
constexpr double kDegenerateRatio = 1e-14;

std::vector<RateAtom> normalised(std::vector<RateAtom> atoms) {
  std::erase_if(atoms, [](const RateAtom& a) { return !(a.weight > 0.0); });
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!(total > 0.0)) throw DomainError("belief: density has no mass on the nodes");
  for (auto& a : atoms) a.weight /= total;
  return atoms;
}

std::vector<double> exponents(double theta, const Belief& belief, const AssetParams& asset) {
  std::vector<double> out;
  out.reserve(belief.atoms().size());
  for (const auto& atom : belief.atoms())
    out.push_back(alpha_exponent(theta, asset.with_rate(atom.rate)));
  return out;
}

}  // namespace

Belief Belief::from_atoms(std::vector<RateAtom> atoms) {
  if (atoms.empty()) throw DomainError("belief: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(std::isfinite(a.rate) && a.rate > 0.0))
      throw DomainError("belief: rates must be positive, got " + fmt(a.rate));
    if (!(std::isfinite(a.weight) && a.weight > 0.0))
      throw DomainError("belief: weights must be positive, got " + fmt(a.weight));
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("belief: weights sum to " + fmt(total) + ", expected 1");
  return Belief(std::move(atoms));
}

Belief Belief::singleton(double rate) { return from_atoms({{rate, 1.0}}); }

Belief Belief::quasi_exponential(double lambda, double beta1, double beta2) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw DomainError("belief: lambda must lie in [0, 1], got " + fmt(lambda));
  std::vector<RateAtom> atoms;
  if (lambda > 0.0) atoms.push_back({beta1, lambda});
  if (lambda < 1.0) atoms.push_back({beta2, 1.0 - lambda});
  return from_atoms(std::move(atoms));
}

Belief Belief::generalized_hyperbolic(double a, double b, std::size_t nodes) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("belief: hyperbolic a and b must be positive");
  const double shape = b / a;
  const boost::math::gamma_distribution<double> dist(shape, a);
  const double upper = boost::math::quantile(boost::math::complement(dist, kTailMass));
  const auto rule = gauss_legendre(nodes, 0.0, upper);
  std::vector<RateAtom> atoms;
  atoms.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    atoms.push_back({rule.nodes[i], rule.weights[i] * boost::math::pdf(dist, rule.nodes[i])});
  return from_atoms(normalised(std::move(atoms)));
}

Belief Belief::compact(const std::function<double(double)>& density, double lo, double hi,
                       std::size_t nodes) {
  if (!(lo >= 0.0 && hi > lo)) throw DomainError("belief: need 0 <= lo < hi");
  const auto rule = gauss_legendre(nodes, lo, hi);
  std::vector<RateAtom> atoms;
  atoms.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    atoms.push_back({rule.nodes[i], rule.weights[i] * density(rule.nodes[i])});
  return from_atoms(normalised(std::move(atoms)));
}

std::size_t Belief::support_size() const {
  std::vector<double> rates;
  rates.reserve(atoms_.size());
  for (const auto& a : atoms_) rates.push_back(a.rate);
  std::sort(rates.begin(), rates.end());
  std::size_t distinct = rates.empty() ? 0 : 1;
  for (std::size_t i = 1; i < rates.size(); ++i)
    if (rates[i] - rates[i - 1] > 1e-12 * rates[i]) ++distinct;
  return distinct;
}

double mean_discount(const Belief& belief, double t) {
  if (!(t >= 0.0)) throw DomainError("mean_discount: t must be non-negative");
  double sum = 0.0;
  for (const auto& a : belief.atoms()) sum += a.weight * std::exp(-a.rate * t);
  return sum;
}

double hyperbolic_discount(double a, double b, double t) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("hyperbolic_discount: a and b must be positive");
  if (!(t >= 0.0)) throw DomainError("hyperbolic_discount: t must be non-negative");
  return std::pow(1.0 + a * t, -b / a);
}

double belief_mean_rate(const Belief& belief) {
  double sum = 0.0;
  for (const auto& a : belief.atoms()) sum += a.weight * a.rate;
  return sum;
}

double candidate_boundary_r(double theta, const Belief& belief, const AssetParams& asset) {
  asset.validate();
  const auto alphas = exponents(theta, belief, asset);
  double mean_alpha = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) mean_alpha += belief.atoms()[i].weight * alphas[i];
  return std::exp(1.0 / mean_alpha);
}

double theta_tilde(double x, double theta, double r, const Belief& belief,
                   const AssetParams& asset) {
  if (!(x > 0.0 && x < r))
    throw DomainError("theta_tilde: need 0 < x < r, got x=" + fmt(x) + ", r=" + fmt(r));
  asset.validate();
  const auto alphas = exponents(theta, belief, asset);
  const double lx = std::log(x);
  const double lr = std::log(r);
  // Terms x^{a-1} / r^a, rescaled by the largest so nothing under- or overflows.
  std::vector<double> logs(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) logs[i] = (alphas[i] - 1.0) * lx - alphas[i] * lr;
  const double top = *std::max_element(logs.begin(), logs.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double term = belief.atoms()[i].weight * alphas[i] * std::exp(logs[i] - top);
    num += term;
    den += term * (1.0 - alphas[i]);
  }
  if (std::abs(den) <= kDegenerateRatio * num)
    throw DegeneracyError("theta_tilde: f_xx vanishes at x=" + fmt(x) +
                          "; the Hamiltonian is unbounded in the control");
  return asset.mu / (asset.sigma * asset.sigma) * num / den;
}

ThetaTildeLimits theta_tilde_limits(double theta, double r, const Belief& belief,
                                    const AssetParams& asset) {
  asset.validate();
  const auto alphas = exponents(theta, belief, asset);
  const auto& atoms = belief.atoms();
  const double ratio = asset.mu / (asset.sigma * asset.sigma);
  constexpr double inf = std::numeric_limits<double>::infinity();
  (void)r;  // both limits are free of r

  ThetaTildeLimits out;
  {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      num += atoms[i].weight * alphas[i];
      den += atoms[i].weight * alphas[i] * (1.0 - alphas[i]);
    }
    out.at_r = std::abs(den) <= kDegenerateRatio * num ? std::copysign(inf, den)
                                                        : ratio * num / den;
  }

  // As x -> 0+ the atoms with the smallest exponent dominate.
  const double a_min = *std::min_element(alphas.begin(), alphas.end());
  const double same = 1e-12 * std::max(1.0, a_min);
  double num = 0.0;
  double den = 0.0;
  double next_alpha = inf;
  double next_den = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (alphas[i] - a_min <= same) {
      num += atoms[i].weight * alphas[i];
      den += atoms[i].weight * alphas[i] * (1.0 - alphas[i]);
    } else if (alphas[i] < next_alpha - same) {
      next_alpha = alphas[i];
      next_den = atoms[i].weight * alphas[i] * (1.0 - alphas[i]);
    } else if (alphas[i] - next_alpha <= same) {
      next_den += atoms[i].weight * alphas[i] * (1.0 - alphas[i]);
    }
  }
  if (std::abs(den) > kDegenerateRatio * num) {
    out.at_zero = ratio * num / den;
  } else {
    // The leading f_xx weight vanishes (alpha_min = 1); the next exponent fixes
    // the sign of f_xx near zero while f_x stays of order one.
    out.at_zero = next_den == 0.0 ? inf : std::copysign(inf, next_den);
  }
  return out;
}

ExclusionReport exclusion_check(double theta, const Belief& belief, const AssetParams& asset,
                                std::size_t grid_n) {
  if (!(std::isfinite(theta) && theta > 0.0))
    throw DomainError("exclusion_check: theta must be positive, got " + fmt(theta));
  if (grid_n < 2) throw DomainError("exclusion_check: grid_n must be at least 2");
  asset.validate();

  ExclusionReport rep;
  rep.theta = theta;
  rep.r = candidate_boundary_r(theta, belief, asset);
  rep.support_size = belief.support_size();
  rep.singleton = rep.support_size == 1;
  rep.limits = theta_tilde_limits(theta, rep.r, belief, asset);
  rep.endpoint_gap = std::abs(rep.limits.at_zero - rep.limits.at_r);
  if (std::isnan(rep.endpoint_gap)) rep.endpoint_gap = std::numeric_limits<double>::infinity();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double dev = std::max(std::abs(rep.limits.at_zero - theta), std::abs(rep.limits.at_r - theta));
  for (double x : open_interval_grid(rep.r, grid_n)) {
    try {
      const double v = theta_tilde(x, theta, rep.r, belief, asset);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      dev = std::max(dev, std::abs(v - theta));
    } catch (const DegeneracyError&) {
      ++rep.degenerate_points;
    }
  }
  rep.grid_min = lo;
  rep.grid_max = hi;
  rep.grid_range = hi >= lo ? hi - lo : 0.0;
  rep.max_deviation = std::isnan(dev) ? std::numeric_limits<double>::infinity() : dev;

  rep.mean_rate = belief_mean_rate(belief);
  rep.d_lower_bound = std::exp(
      (asset.mu * theta - 0.5 * asset.sigma * asset.sigma * theta * theta) / rep.mean_rate);

  const bool non_constant = rep.degenerate_points > 0 || rep.grid_range > kNonConstancyTol ||
                            rep.endpoint_gap > kNonConstancyTol;
  const bool off_target = rep.max_deviation > kNonConstancyTol;
  rep.exclusion = !rep.singleton && (non_constant || off_target);
  rep.constant_equilibrium_possible = !rep.exclusion && !off_target;
  return rep;
}

}  // namespace weakeq
