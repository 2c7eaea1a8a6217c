#include "weakeq/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <limits>
#include <thread>
#include <tuple>
#include <vector>

#include "weakeq/errors.hpp"
#include "weakeq/philox.hpp"

namespace weakeq {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// A coarse block is accepted without refinement when the Brownian-bridge
// probability of touching a barrier inside it is below this.
constexpr double kNoCrossProb = 1e-13;
constexpr int kMaxBlockLog2 = 20;

/// One piece of a path: a control held for `steps` grid steps, with or
/// without stopping at exit from the region.
struct Segment {
  const Control* control = nullptr;
  std::int64_t steps = 0;
  bool stop_on_exit = true;
};

struct PathState {
  double x = 0.0;
  std::int64_t step = 0;  // grid steps elapsed
  bool stopped = false;
};

class PathSimulator {
 public:
  PathSimulator(const MarketParams& m, const Region& region, const McConfig& cfg)
      : m_(m), region_(region), cfg_(cfg), dt_(cfg.dt) {
    int lg = static_cast<int>(std::floor(std::log2(1.0 / dt_)));
    block_log2_ = std::clamp(lg, 0, kMaxBlockLog2);
    log_lo_ = region.lo > 0.0 ? std::log(region.lo) : -std::numeric_limits<double>::infinity();
    log_hi_ = std::isfinite(region.hi) ? std::log(region.hi) : std::numeric_limits<double>::infinity();
  }

  /// Advances `state` through `seg`; `tag` selects the random stream.
  void run(PathState& state, const Segment& seg, const PathRng& rng) const {
    if (seg.steps <= 0 || state.stopped) return;
    if (seg.control->is_constant())
      seg.stop_on_exit ? run_blocks(state, seg, rng) : run_free(state, seg, rng);
    else
      run_euler(state, seg, rng);
  }

 private:
  [[nodiscard]] bool outside_log(double y) const { return y <= log_lo_ || y >= log_hi_; }

  /// Probability that a Brownian bridge from ya to yb over `span` with variance
  /// rate s2 touches either barrier.
  [[nodiscard]] double cross_prob(double ya, double yb, double s2span) const {
    if (outside_log(ya) || outside_log(yb)) return 1.0;
    double p = 0.0;
    if (std::isfinite(log_hi_)) p += std::exp(-2.0 * (log_hi_ - ya) * (log_hi_ - yb) / s2span);
    if (std::isfinite(log_lo_)) p += std::exp(-2.0 * (ya - log_lo_) * (yb - log_lo_) / s2span);
    return std::min(p, 1.0);
  }

  [[nodiscard]] double barrier_hit_log(double yb) const {
    return yb >= log_hi_ || std::abs(yb - log_hi_) < std::abs(yb - log_lo_) ? log_hi_ : log_lo_;
  }

  struct Hit {
    bool hit = false;
    std::int64_t offset = 0;  // grid steps from block start
    double y = 0.0;
  };

  /// First grid point at or beyond a barrier on a block of n steps with known
  /// endpoints; interior points are drawn as Brownian-bridge midpoints.
  Hit resolve(double ya, double yb, std::int64_t n, std::uint32_t node, std::uint32_t block,
              double s2, const PathRng& rng) const {
    if (n == 1) {
      // With the bridge correction every exit is a continuous crossing, so the
      // path is stopped on the barrier rather than at the overshoot.
      if (outside_log(yb)) return {true, 1, cfg_.bridge_correction ? barrier_hit_log(yb) : yb};
      if (cfg_.bridge_correction) {
        const double p = cross_prob(ya, yb, s2 * dt_);
        if (rng.uniform(block, node) < p) return {true, 1, barrier_hit_log(yb)};
      }
      return {};
    }
    if (cross_prob(ya, yb, s2 * dt_ * static_cast<double>(n)) < kNoCrossProb) return {};
    const std::int64_t left = n / 2;
    const double w = static_cast<double>(left) / static_cast<double>(n);
    const double var = s2 * dt_ * static_cast<double>(left) * static_cast<double>(n - left) /
                       static_cast<double>(n);
    const double ym = ya + w * (yb - ya) + std::sqrt(var) * rng.normal(block, node);
    if (Hit h = resolve(ya, ym, left, 2 * node, block, s2, rng); h.hit) return h;
    Hit h = resolve(ym, yb, n - left, 2 * node + 1, block, s2, rng);
    if (h.hit) h.offset += left;
    return h;
  }

  void run_blocks(PathState& st, const Segment& seg, const PathRng& rng) const {
    const double u = (*seg.control)(st.x);
    const double s = m_.sigma * u;
    const double s2 = s * s;
    const double drift = m_.mu * u - 0.5 * s2;
    const std::int64_t block = std::int64_t{1} << block_log2_;
    double y = std::log(st.x);
    std::int64_t done = 0;
    for (std::uint32_t b = 0; done < seg.steps; ++b) {
      const std::int64_t n = std::min(block, seg.steps - done);
      const double span = dt_ * static_cast<double>(n);
      const double yb = y + drift * span + s * std::sqrt(span) * rng.normal(b, 0);
      const Hit h = resolve(y, yb, n, 1, b, s2, rng);
      if (h.hit) {
        st.x = std::exp(h.y);
        st.step += done + h.offset;
        st.stopped = true;
        return;
      }
      y = yb;
      done += n;
    }
    st.x = std::exp(y);
    st.step += seg.steps;
  }

  void run_free(PathState& st, const Segment& seg, const PathRng& rng) const {
    const double u = (*seg.control)(st.x);
    const double s = m_.sigma * u;
    const double span = dt_ * static_cast<double>(seg.steps);
    st.x *= std::exp((m_.mu * u - 0.5 * s * s) * span + s * std::sqrt(span) * rng.normal(0, 0));
    st.step += seg.steps;
  }

  // Log-Euler with the control frozen over each step.
  void run_euler(PathState& st, const Segment& seg, const PathRng& rng) const {
    const double sq = std::sqrt(dt_);
    for (std::int64_t i = 0; i < seg.steps; ++i) {
      const double u = (*seg.control)(st.x);
      const double s = m_.sigma * u;
      const double xa = st.x;
      st.x *= std::exp((m_.mu * u - 0.5 * s * s) * dt_ +
                       s * sq * rng.normal(static_cast<std::uint32_t>(i), 0));
      ++st.step;
      if (!seg.stop_on_exit) continue;
      if (!region_.contains(st.x)) {
        if (cfg_.bridge_correction) st.x = nearest_barrier(st.x);
        st.stopped = true;
        return;
      }
      if (cfg_.bridge_correction) {
        const double lam2 = s * s * xa * xa;
        double p = 0.0;
        if (std::isfinite(region_.hi))
          p += std::exp(-2.0 * (region_.hi - xa) * (region_.hi - st.x) / (lam2 * dt_));
        if (region_.lo > 0.0)
          p += std::exp(-2.0 * (xa - region_.lo) * (st.x - region_.lo) / (lam2 * dt_));
        if (rng.uniform(static_cast<std::uint32_t>(i), 0) < p) {
          st.x = nearest_barrier(st.x);
          st.stopped = true;
          return;
        }
      }
    }
  }

  [[nodiscard]] double nearest_barrier(double x) const {
    return std::abs(x - region_.hi) < std::abs(x - region_.lo) ? region_.hi : region_.lo;
  }

  MarketParams m_;
  Region region_;
  McConfig cfg_;
  double dt_;
  int block_log2_ = 0;
  double log_lo_;
  double log_hi_;
};

std::int64_t steps_for(double duration, double dt) {
  return std::max<std::int64_t>(1, std::llround(std::ceil(duration / dt - 1e-9)));
}

/// Evaluates `fn(i)` for every path on a fixed partition of indices; the
/// output is independent of the number of threads.
template <class Fn>
void for_each_path(std::size_t n, unsigned threads, Fn&& fn) {
  unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(1, n / 1024)));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += t) fn(i);
    });
}

McEstimate summarize(const std::vector<double>& values, std::size_t truncated) {
  McEstimate est;
  est.n = values.size();
  if (values.empty()) return est;
  est.mean = pairwise_sum(values) / static_cast<double>(est.n);
  if (est.n > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - est.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(est.n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(est.n));
  }
  est.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(est.n);
  return est;
}

void check_probe_inputs(std::span<const double> eps_list) {
  if (eps_list.empty()) throw DomainError("probe: eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw DomainError("probe: eps must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw DomainError("probe: eps list must be strictly decreasing");
  }
}

// Streams 0..: stopped-payoff runs; probes use kProbeStream + eps index.
constexpr std::uint32_t kPayoffStream = 0;
constexpr std::uint32_t kProbeStream = 1u << 16;
constexpr std::uint32_t kSegmentShift = 24;

}  // namespace

void McConfig::validate() const {
  if (paths < 1) throw DomainError("mc: paths must be at least 1");
  if (paths > 0xFFFFFFFFull) throw DomainError("mc: at most 2^32 - 1 paths");
  if (!(dt > 0.0 && std::isfinite(dt))) throw DomainError("mc: dt must be positive");
  if (t_max && !(*t_max > 0.0)) throw DomainError("mc: t_max must be positive");
}

double McConfig::horizon(double beta) const { return t_max.value_or(std::log(1e8) / beta); }

Control Control::constant(double u) {
  Control c;
  c.value_ = u;
  return c;
}

Control Control::feedback(std::function<double(double)> u) {
  Control c;
  c.fn_ = std::move(u);
  return c;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

McEstimate simulate_stopped_payoff(double x0, double y, const Control& control,
                                   const Region& region, const PayoffFn& payoff,
                                   const MarketParams& market, const McConfig& cfg) {
  market.validate();
  cfg.validate();
  const bool at_boundary = x0 == region.lo || x0 == region.hi;
  if (!region.contains(x0) && !at_boundary)
    throw DomainError("simulate_stopped_payoff: x0=" + fmt(x0) + " outside the region");
  if (at_boundary) {
    McEstimate est;
    est.mean = payoff(x0, y);
    est.n = cfg.paths;
    return est;
  }

  const PathSimulator sim(market, region, cfg);
  const Segment seg{&control, steps_for(cfg.horizon(market.beta), cfg.dt), true};
  std::vector<double> values(cfg.paths);
  std::vector<unsigned char> truncated(cfg.paths, 0);
  for_each_path(cfg.paths, cfg.threads, [&](std::size_t i) {
    const PathRng rng(cfg.seed, static_cast<std::uint32_t>(i), kPayoffStream);
    PathState st{x0, 0, false};
    sim.run(st, seg, rng);
    if (st.stopped) {
      values[i] = std::exp(-market.beta * cfg.dt * static_cast<double>(st.step)) * payoff(st.x, y);
    } else {
      truncated[i] = 1;
    }
  });
  std::size_t n_trunc = 0;
  for (auto t : truncated) n_trunc += t;
  return summarize(values, n_trunc);
}

EquilibriumBundle make_habit_bundle(const HabitEquilibrium& eq) {
  EquilibriumBundle b;
  b.market = eq.market;
  b.control_hat = Control::constant(eq.theta_star);
  b.boundary = eq.x_star;
  b.payoff = [prefs = eq.prefs, habit = eq.habit](double x, double y) {
    return payoff_g(x, y, prefs, habit);
  };
  b.aux = [eq](double x, double y) { return aux_f(x, y, eq); };
  return b;
}

namespace {

enum class ProbeKind { control, stop };

ProbeResult run_probe(ProbeKind kind, double x0, const EquilibriumBundle& bundle, double u,
                      std::span<const double> eps_list, const McConfig& cfg,
                      Continuation continuation) {
  bundle.market.validate();
  cfg.validate();
  check_probe_inputs(eps_list);
  const auto& m = bundle.market;
  const Region region{0.0, bundle.boundary};
  const bool in_c = region.contains(x0);
  const double baseline = in_c ? bundle.aux(x0, x0) : bundle.payoff(x0, x0);
  const Control perturbed = Control::constant(u);
  const Control& first = kind == ProbeKind::control ? perturbed : bundle.control_hat;
  const std::int64_t tail_steps = steps_for(cfg.horizon(m.beta), cfg.dt);

  ProbeResult result;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    // The window is resolved on its own grid: at most dt, at least one step.
    McConfig window_cfg = cfg;
    const std::int64_t n_window = steps_for(eps, cfg.dt);
    window_cfg.dt = eps / static_cast<double>(n_window);
    const PathSimulator window_sim(m, region, window_cfg);
    const PathSimulator tail_sim(m, region, cfg);
    const Segment window{&first, n_window, kind == ProbeKind::control};
    const Segment tail{&bundle.control_hat, tail_steps, true};

    std::vector<double> values(cfg.paths);
    for_each_path(cfg.paths, cfg.threads, [&](std::size_t i) {
      const auto stream = kProbeStream + static_cast<std::uint32_t>(e);
      const PathRng rng_w(cfg.seed, static_cast<std::uint32_t>(i), stream);
      PathState st{x0, 0, false};
      window_sim.run(st, window, rng_w);
      if (st.stopped) {
        const double t = window_cfg.dt * static_cast<double>(st.step);
        values[i] = std::exp(-m.beta * t) * bundle.payoff(st.x, x0);
        return;
      }
      if (!region.contains(st.x)) {
        values[i] = std::exp(-m.beta * eps) * bundle.payoff(st.x, x0);
        return;
      }
      if (continuation == Continuation::analytic) {
        values[i] = std::exp(-m.beta * eps) * bundle.aux(st.x, x0);
        return;
      }
      const PathRng rng_t(cfg.seed, static_cast<std::uint32_t>(i), stream | (1u << kSegmentShift));
      PathState tail_state{st.x, 0, false};
      tail_sim.run(tail_state, tail, rng_t);
      values[i] = tail_state.stopped
                      ? std::exp(-m.beta * (eps + cfg.dt * static_cast<double>(tail_state.step))) *
                            bundle.payoff(tail_state.x, x0)
                      : 0.0;
    });
    const McEstimate est = summarize(values, 0);
    result.points.push_back({eps, (est.mean - baseline) / eps, est.std_error / eps});
  }
  std::tie(result.intercept, result.intercept_stderr) = extrapolate_intercept(result.points);
  return result;
}

}  // namespace

ProbeResult control_perturbation_probe(double x0, const EquilibriumBundle& bundle, double u,
                                       std::span<const double> eps_list, const McConfig& cfg,
                                       Continuation continuation) {
  if (!(u > 0.0)) throw DomainError("probe-control: u must be positive, got " + fmt(u));
  if (!(x0 > 0.0 && x0 < bundle.boundary))
    throw DomainError("probe-control: x0=" + fmt(x0) + " is not in the continuation region");
  return run_probe(ProbeKind::control, x0, bundle, u, eps_list, cfg, continuation);
}

ProbeResult stop_delay_probe(double x0, const EquilibriumBundle& bundle,
                             std::span<const double> eps_list, const McConfig& cfg,
                             Continuation continuation) {
  if (!(x0 > 0.0)) throw DomainError("probe-stop: x0 must be positive");
  if (x0 == bundle.boundary)
    throw DomainError("probe-stop: x0 on the stopping boundary is not probed");
  return run_probe(ProbeKind::stop, x0, bundle, 0.0, eps_list, cfg, continuation);
}

McEstimate immediate_stop_gap(double x0, const EquilibriumBundle& bundle, const McConfig& cfg) {
  if (!(x0 > 0.0)) throw DomainError("immediate_stop_gap: x0 must be positive");
  cfg.validate();
  const double g0 = bundle.payoff(x0, x0);
  if (x0 >= bundle.boundary) {
    McEstimate zero;
    zero.n = cfg.paths;
    return zero;
  }
  McEstimate est = simulate_stopped_payoff(x0, x0, bundle.control_hat, Region{0.0, bundle.boundary},
                                           bundle.payoff, bundle.market, cfg);
  est.mean -= g0;
  return est;
}

std::pair<double, double> extrapolate_intercept(std::span<const ProbePoint> points) {
  if (points.empty()) return {0.0, 0.0};
  if (points.size() == 1) return {points[0].slope, points[0].std_error};
  // Weights 1 / se^2, floored so exact points do not produce infinities.
  double floor_var = std::numeric_limits<double>::infinity();
  for (const auto& p : points)
    if (p.std_error > 0.0) floor_var = std::min(floor_var, p.std_error * p.std_error);
  if (!std::isfinite(floor_var)) floor_var = 1.0;
  floor_var *= 1e-6;
  double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
  for (const auto& p : points) {
    const double w = 1.0 / std::max(p.std_error * p.std_error, floor_var);
    sw += w;
    swx += w * p.eps;
    swxx += w * p.eps * p.eps;
    swy += w * p.slope;
    swxy += w * p.eps * p.slope;
  }
  const double det = sw * swxx - swx * swx;
  const double intercept = (swxx * swy - swx * swxy) / det;
  const double var = swxx / det;
  return {intercept, std::sqrt(var)};
}

void write_probe_csv(std::ostream& out, const ProbeResult& result) {
  out << "eps,slope,stderr\n";
  for (const auto& p : result.points)
    out << fmt(p.eps) << ',' << fmt(p.slope) << ',' << fmt(p.std_error) << '\n';
  out << "intercept,intercept_stderr\n";
  out << fmt(result.intercept) << ',' << fmt(result.intercept_stderr) << '\n';
}

}  // namespace weakeq
