#include "weakeq/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
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

Derivatives checked(const BivariateFn& fn, double x, double y, const char* condition,
                    const char* what) {
  Derivatives d;
  try {
    d = fn(x, y);
  } catch (const std::exception& e) {
    throw NumericError(std::string(condition) + ": evaluating " + what + " at (" + fmt(x) + ", " +
                       fmt(y) + ") failed: " + e.what());
  }
  if (!std::isfinite(d.value) || !std::isfinite(d.d1) || !std::isfinite(d.d2))
    throw NumericError(std::string(condition) + ": non-finite " + what + " derivatives at (" +
                       fmt(x) + ", " + fmt(y) + ")");
  return d;
}

/// Tracks the grid point with the largest badness; ties keep the first seen.
struct Tracker {
  double badness = -std::numeric_limits<double>::infinity();
  double residual = 0.0;
  double x = 0.0;
  std::optional<double> y;

  void offer(double bad, double res, double at_x, std::optional<double> at_y = std::nullopt) {
    if (bad > badness) {
      badness = bad;
      residual = res;
      x = at_x;
      y = at_y;
    }
  }
};

}  // namespace

const ConditionResult* VerificationReport::find(const std::string& id) const {
  for (const auto& c : conditions)
    if (c.id == id) return &c;
  return nullptr;
}

CandidateProblem make_habit_problem(const HabitEquilibrium& eq) {
  CandidateProblem p;
  p.payoff = [prefs = eq.prefs, habit = eq.habit](double x, double y) {
    return payoff_g_derivs(x, y, prefs, habit);
  };
  p.aux = [eq](double x, double y) { return aux_f_derivs(x, y, eq); };
  p.control_hat = [theta = eq.theta_star](double) { return theta; };
  p.boundary = eq.x_star;
  p.market = eq.market;
  return p;
}

std::optional<double> hamiltonian_argmax(const Derivatives& f, double x,
                                         const MarketParams& market) {
  if (!(f.d2 < 0.0)) return std::nullopt;
  return -market.mu * f.d1 / (market.sigma * market.sigma * x * f.d2);
}

double check_smooth_fitting(const CandidateProblem& problem) {
  const double xs = problem.boundary;
  if (!(std::isfinite(xs) && xs > 0.0))
    throw DomainError("check_smooth_fitting: boundary must be finite and positive");
  // Left limit of f_x from a point just inside C, corrected to first order.
  const double inside = xs * (1.0 - 1e-9);
  const Derivatives f = checked(problem.aux, inside, xs, "SS", "f");
  const double fx_left = f.d1 + f.d2 * (xs - inside);
  const Derivatives g = checked(problem.payoff, xs, xs, "SS", "g");
  return fx_left - g.d1;
}

VerificationReport verify_system(const CandidateProblem& problem, const VerifierOptions& opt) {
  if (opt.grid_c < 2 || opt.grid_d < 2 || opt.grid_y < 2)
    throw DomainError("verify_system: grids need at least 2 points");
  if (!(opt.tol > 0.0 && opt.ss_tol > 0.0)) throw DomainError("verify_system: tol must be positive");
  if (!(std::isfinite(problem.boundary) && problem.boundary > 0.0))
    throw DomainError("verify_system: continuation region needs a finite positive right end");
  problem.market.validate();

  const auto& m = problem.market;
  const double xs = problem.boundary;
  const auto c_grid = open_interval_grid(xs, opt.grid_c);
  const double d_end = opt.d_extent * xs;
  const auto d_grid =
      linspace(xs * (1.0 + 1.0 / static_cast<double>(opt.grid_d)), d_end, opt.grid_d);
  const auto y_grid = linspace(d_end / static_cast<double>(opt.grid_y), d_end, opt.grid_y);

  VerificationReport rep;
  rep.options = opt;
  rep.boundary = xs;
  rep.d_truncation = d_end;

  auto finish = [&](const char* id, const Tracker& t, bool pass, std::string flag = {}) {
    rep.conditions.push_back({id, t.residual, t.x, t.y, pass, std::move(flag)});
  };

  {
    Tracker t;
    for (double x : c_grid) {
      const double u = problem.control_hat(x);
      for (double y : y_grid) {
        const double r = generator_value(checked(problem.aux, x, y, "G1", "f"), x, u, m);
        t.offer(std::abs(r), r, x, y);
      }
    }
    finish("G1", t, t.badness <= opt.tol);
  }

  {
    Tracker t;
    bool unbounded = false;
    bool mismatch = false;
    double diag = 0.0;
    for (double x : c_grid) {
      const double u_hat = problem.control_hat(x);
      const Derivatives f = checked(problem.aux, x, x, "G2", "f");
      diag = std::max(diag, std::abs(generator_value(f, x, u_hat, m)));
      const auto dom = problem.control_domain;
      std::optional<double> best = hamiltonian_argmax(f, x, m);
      if (best) {
        best = std::clamp(*best, dom.lo, dom.unbounded() ? *best : dom.hi);
      } else if (dom.unbounded()) {
        unbounded = true;
        t.offer(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                x);
        continue;
      } else {
        // Convex in u: the supremum sits at an end of the control set.
        best = generator_value(f, x, dom.lo, m) >= generator_value(f, x, dom.hi, m) ? dom.lo
                                                                                     : dom.hi;
      }
      const double h = generator_value(f, x, *best, m);
      const double du = std::abs(*best - u_hat) / (1.0 + std::abs(u_hat));
      if (du > opt.tol) mismatch = true;
      t.offer(std::max(std::abs(h), du), h, x);
    }
    rep.diagonal_identity = diag;
    std::string flag = unbounded ? "unbounded_hamiltonian" : (mismatch ? "control_mismatch" : "");
    finish("G2", t, t.badness <= opt.tol, flag);
  }

  {
    Tracker t;
    for (double x : d_grid) {
      const double r =
          generator_value(checked(problem.payoff, x, x, "G_PLUS", "g"), x, problem.control_hat(x), m);
      t.offer(r, r, x);
    }
    finish("G_PLUS", t, t.badness <= opt.tol);
  }

  {
    Tracker t;
    for (double x : d_grid) {
      const double r = generator_value(checked(problem.payoff, x, xs, "G9", "g"), x,
                                       problem.control_hat(x), m);
      t.offer(r, r, x, xs);
    }
    finish("G9", t, t.badness <= opt.tol);
  }

  {
    Tracker t;
    const double s = check_smooth_fitting(problem);
    t.offer(std::abs(s), s, xs, xs);
    finish("SS", t, std::abs(s) <= opt.ss_tol);
  }

  {
    Tracker t;
    for (double x : d_grid)
      for (double y : y_grid) {
        const double r = checked(problem.aux, x, y, "G5", "f").value -
                         checked(problem.payoff, x, y, "G5", "g").value;
        t.offer(std::abs(r), r, x, y);
      }
    finish("G5", t, t.badness <= opt.tol);
  }

  {
    Tracker t;
    auto visit = [&](double x) {
      const double r = checked(problem.aux, x, x, "G6", "f").value -
                       checked(problem.payoff, x, x, "G6", "g").value;
      t.offer(-r, r, x);
    };
    for (double x : c_grid) visit(x);
    for (double x : d_grid) visit(x);
    finish("G6", t, t.residual >= -opt.tol);
  }

  rep.overall = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                            [](const ConditionResult& c) { return c.pass; });
  return rep;
}

}  // namespace weakeq
