#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "config.hpp"
#include "weakeq/errors.hpp"

namespace weakeq::cli {

using nlohmann::ordered_json;

ordered_json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

namespace {

std::string csv(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Flags are parsed into holders and applied after the config file.
class Overrides {
 public:
  template <class T, class Set>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help, Set set) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *holder, help);
    apply_.push_back([opt, holder, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *holder);
    });
    return opt;
  }
  void apply(RunConfig& c) const {
    for (const auto& f : apply_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

void model_flags(CLI::App* app, Overrides& ov) {
  ov.add<double>(app, "--mu", "asset drift", [](RunConfig& c, double v) { c.market.mu = v; });
  ov.add<double>(app, "--sigma", "asset volatility",
                 [](RunConfig& c, double v) { c.market.sigma = v; });
  ov.add<double>(app, "--beta", "discount rate", [](RunConfig& c, double v) { c.market.beta = v; });
  ov.add<double>(app, "--a", "risk aversion", [](RunConfig& c, double v) { c.prefs.a = v; });
  ov.add<double>(app, "--k", "utility shift", [](RunConfig& c, double v) { c.prefs.k = v; });
  ov.add<double>(app, "--habit-slope", "linear habit h(x) = slope * x",
                 [](RunConfig& c, double v) { c.habit_slope = v; });
}

void mc_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::size_t>(app, "--paths", "number of paths",
                      [](RunConfig& c, std::size_t v) { c.mc.paths = v; });
  ov.add<double>(app, "--dt", "monitoring step", [](RunConfig& c, double v) { c.mc.dt = v; });
  ov.add<double>(app, "--t-max", "horizon cap", [](RunConfig& c, double v) { c.mc.t_max = v; });
  ov.add<bool>(app, "--bridge", "Brownian-bridge crossing correction (true/false)",
               [](RunConfig& c, bool v) { c.mc.bridge_correction = v; });
  ov.add<unsigned>(app, "--threads", "worker threads, 0 for all cores",
                   [](RunConfig& c, unsigned v) { c.mc.threads = v; });
}

HabitEquilibrium solve(const RunConfig& c) {
  return solve_habit_equilibrium(c.market, c.prefs, HabitSpec::linear(c.habit_slope));
}

ordered_json report_json(const VerificationReport& rep) {
  ordered_json j;
  j["overall"] = rep.overall;
  j["boundary"] = json_number(rep.boundary);
  j["d_truncation"] = json_number(rep.d_truncation);
  j["diagonal_identity"] = json_number(rep.diagonal_identity);
  j["grid"] = {{"c", rep.options.grid_c},
               {"d", rep.options.grid_d},
               {"y", rep.options.grid_y},
               {"tol", json_number(rep.options.tol)},
               {"ss_tol", json_number(rep.options.ss_tol)},
               {"d_extent", json_number(rep.options.d_extent)}};
  ordered_json conds = ordered_json::array();
  for (const auto& c : rep.conditions) {
    ordered_json e;
    e["id"] = c.id;
    e["pass"] = c.pass;
    e["worst"] = json_number(c.worst);
    e["at"] = json_number(c.at);
    if (c.at_y) e["at_y"] = json_number(*c.at_y);
    if (!c.flag.empty()) e["flag"] = c.flag;
    conds.push_back(std::move(e));
  }
  j["conditions"] = std::move(conds);
  return j;
}

Continuation parse_continuation(const std::string& s) {
  if (s == "analytic") return Continuation::analytic;
  if (s == "simulated") return Continuation::simulated;
  throw UsageError("--continuation must be 'analytic' or 'simulated'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak-equilibrium tools for stopping-control problems", "weakeq"};
  app.require_subcommand(1, 1);
  Overrides ov;

  std::string config_path;
  std::string out_path;
  app.add_option("--config", config_path, "JSON config file; flags override it");
  app.add_option("--out", out_path, "write the report here instead of stdout");
  ov.add<std::uint64_t>(&app, "--seed", "RNG seed",
                        [](RunConfig& c, std::uint64_t v) { c.mc.seed = v; });

  auto* solve_cmd = app.add_subcommand("solve-habit", "solve the habit-model equilibrium");
  double theta_lock = 0.0;
  auto* lock_opt = solve_cmd->add_option("--theta-lock", theta_lock,
                                         "also solve the threshold with the proportion locked");

  auto* verify_cmd = app.add_subcommand("verify", "check the extended HJB system on grids");
  double x_star_override = 0.0;
  auto* x_star_opt =
      verify_cmd->add_option("--x-star", x_star_override, "replace the solved boundary");
  ov.add<std::size_t>(verify_cmd, "--grid-c", "points on C",
                      [](RunConfig& c, std::size_t v) { c.verifier.grid_c = v; });
  ov.add<std::size_t>(verify_cmd, "--grid-d", "points on D",
                      [](RunConfig& c, std::size_t v) { c.verifier.grid_d = v; });
  ov.add<std::size_t>(verify_cmd, "--grid-y", "points on the y axis",
                      [](RunConfig& c, std::size_t v) { c.verifier.grid_y = v; });
  ov.add<double>(verify_cmd, "--tol", "residual tolerance",
                 [](RunConfig& c, double v) { c.verifier.tol = v; });
  ov.add<double>(verify_cmd, "--ss-tol", "smooth-fit tolerance",
                 [](RunConfig& c, double v) { c.verifier.ss_tol = v; });
  ov.add<double>(verify_cmd, "--d-extent", "D is truncated at d_extent * x*",
                 [](RunConfig& c, double v) { c.verifier.d_extent = v; });

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo stopped payoff");
  std::vector<double> x0_list;
  double y_ref = 0.0;
  mc_cmd->add_option("--x0", x0_list, "starting wealth(s)")->required()->delimiter(',');
  auto* y_opt = mc_cmd->add_option("--y", y_ref, "reference wealth (default: x0)");

  auto* pc_cmd = app.add_subcommand("probe-control", "control perturbation probe");
  auto* ps_cmd = app.add_subcommand("probe-stop", "stopping delay probe");
  double probe_x0 = 0.0;
  double probe_u = 0.0;
  std::vector<double> eps_list = default_eps_list();
  std::string continuation = "analytic";
  auto* u_opt = pc_cmd->add_option("--u", probe_u, "perturbed proportion (default: theta*)");
  for (auto* cmd : {pc_cmd, ps_cmd}) {
    cmd->add_option("--x0", probe_x0, "starting wealth")->required();
    cmd->add_option("--eps-list", eps_list, "decreasing window lengths")->delimiter(',');
    cmd->add_option("--continuation", continuation, "analytic or simulated");
  }

  auto* ex_cmd = app.add_subcommand("exclude", "constant-control exclusion under ambiguity");
  double ex_theta = 0.0;
  std::size_t ex_grid = 100;
  ex_cmd->add_option("--theta", ex_theta, "candidate constant proportion")->required();
  ex_cmd->add_option("--grid", ex_grid, "interior grid points on (0, r)");
  ov.add<std::string>(ex_cmd, "--belief", "quasi:l,b1,b2 | hyper:a,b | file:<csv>",
                      [](RunConfig& c, const std::string& v) { c.belief = v; });

  auto* sweep_cmd = app.add_subcommand("sweep", "comparative statics of x*");
  std::string axis;
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 0;
  sweep_cmd->add_option("--axis", axis, "mu or sigma")->required()->check(
      CLI::IsMember({"mu", "sigma"}));
  sweep_cmd->add_option("--from", from, "first value")->required();
  sweep_cmd->add_option("--to", to, "last value")->required();
  sweep_cmd->add_option("--steps", steps, "number of points")->required();

  for (auto* cmd : {solve_cmd, verify_cmd, mc_cmd, pc_cmd, ps_cmd, sweep_cmd})
    model_flags(cmd, ov);
  ov.add<double>(ex_cmd, "--mu", "asset drift", [](RunConfig& c, double v) { c.market.mu = v; });
  ov.add<double>(ex_cmd, "--sigma", "asset volatility",
                 [](RunConfig& c, double v) { c.market.sigma = v; });
  for (auto* cmd : {mc_cmd, pc_cmd, ps_cmd}) mc_flags(cmd, ov);
  for (auto* cmd : app.get_subcommands({})) cmd->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::ostringstream report;
  int status = kOk;
  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    ov.apply(cfg);
    validate(cfg);

    if (solve_cmd->parsed()) {
      const auto eq = solve(cfg);
      const auto lock1 = solve_locked_threshold(1.0, cfg.market, cfg.prefs, eq.habit);
      ordered_json j;
      j["theta_star"] = json_number(eq.theta_star);
      j["alpha"] = json_number(eq.alpha);
      j["x_star"] = json_number(eq.x_star);
      j["x0_star"] = json_number(eq.x0_star);
      j["x1_star"] = json_number(lock1.x_star);
      if (lock_opt->count() > 0) {
        const auto lk = solve_locked_threshold(theta_lock, cfg.market, cfg.prefs, eq.habit);
        j["theta_lock"] = json_number(lk.theta);
        j["alpha_lock"] = json_number(lk.alpha);
        j["x_lock"] = json_number(lk.x_star);
      }
      report << j.dump(2) << '\n';
    } else if (verify_cmd->parsed()) {
      auto eq = solve(cfg);
      if (x_star_opt->count() > 0) {
        if (!(x_star_override > 0.0)) throw UsageError("--x-star must be positive");
        eq = with_boundary(eq, x_star_override);
      }
      const auto rep = verify_system(make_habit_problem(eq), cfg.verifier);
      report << report_json(rep).dump(2) << '\n';
      if (!rep.overall) {
        status = kVerifiedFailure;
        for (const auto& c : rep.conditions)
          if (!c.pass) err << "failed: " << c.id << " (worst " << c.worst << " at x=" << c.at << ")\n";
      }
    } else if (mc_cmd->parsed()) {
      const auto eq = solve(cfg);
      const auto bundle = make_habit_bundle(eq);
      report << "x0,y,mean,stderr,n,truncated_fraction,closed_form\n";
      for (double x0 : x0_list) {
        if (!(x0 > 0.0)) throw UsageError("--x0 must be positive");
        const double y = y_opt->count() > 0 ? y_ref : x0;
        if (!(y > 0.0)) throw UsageError("--y must be positive");
        McEstimate est;
        if (x0 >= eq.x_star) {
          est.mean = bundle.payoff(x0, y);
          est.n = cfg.mc.paths;
        } else {
          est = simulate_stopped_payoff(x0, y, bundle.control_hat, Region{0.0, eq.x_star},
                                        bundle.payoff, eq.market, cfg.mc);
        }
        report << csv(x0) << ',' << csv(y) << ',' << csv(est.mean) << ',' << csv(est.std_error)
               << ',' << est.n << ',' << csv(est.truncated_fraction) << ','
               << csv(aux_f(x0, y, eq)) << '\n';
      }
    } else if (pc_cmd->parsed() || ps_cmd->parsed()) {
      const auto eq = solve(cfg);
      const auto bundle = make_habit_bundle(eq);
      const auto cont = parse_continuation(continuation);
      ProbeResult res;
      if (pc_cmd->parsed()) {
        const double u = u_opt->count() > 0 ? probe_u : eq.theta_star;
        res = control_perturbation_probe(probe_x0, bundle, u, eps_list, cfg.mc, cont);
      } else {
        res = stop_delay_probe(probe_x0, bundle, eps_list, cfg.mc, cont);
      }
      write_probe_csv(report, res);
    } else if (ex_cmd->parsed()) {
      const Belief belief = parse_belief(cfg.belief, err);
      const AssetParams asset{cfg.market.mu, cfg.market.sigma};
      const auto rep = exclusion_check(ex_theta, belief, asset, ex_grid);
      ordered_json j;
      j["theta"] = json_number(rep.theta);
      j["belief"] = cfg.belief;
      j["support_size"] = rep.support_size;
      j["singleton"] = rep.singleton;
      j["r"] = json_number(rep.r);
      j["theta_tilde_0"] = json_number(rep.limits.at_zero);
      j["theta_tilde_r"] = json_number(rep.limits.at_r);
      j["endpoint_gap"] = json_number(rep.endpoint_gap);
      j["grid_min"] = json_number(rep.grid_min);
      j["grid_max"] = json_number(rep.grid_max);
      j["grid_range"] = json_number(rep.grid_range);
      j["max_deviation"] = json_number(rep.max_deviation);
      j["degenerate_points"] = rep.degenerate_points;
      j["mean_rate"] = json_number(rep.mean_rate);
      j["d_lower_bound"] = json_number(rep.d_lower_bound);
      j["exclusion"] = rep.exclusion;
      j["constant_equilibrium_possible"] = rep.constant_equilibrium_possible;
      report << j.dump(2) << '\n';
      if (!rep.exclusion && !rep.singleton) status = kVerifiedFailure;
    } else if (sweep_cmd->parsed()) {
      const auto pts =
          sweep_threshold(axis == "mu" ? SweepAxis::mu : SweepAxis::sigma, from, to, steps,
                          cfg.market, cfg.prefs, HabitSpec::linear(cfg.habit_slope));
      write_sweep_csv(report, pts);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  if (out_path.empty()) {
    out << report.str();
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << out_path << "'\n";
      return kUsage;
    }
    file << report.str();
  }
  return status;
}

}  // namespace weakeq::cli
