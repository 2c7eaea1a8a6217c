#pragma once

// Run configuration shared by all subcommands: documented defaults, then the
// --config JSON file, then explicit flags.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "weakeq/ambiguity.hpp"
#include "weakeq/diffusion.hpp"
#include "weakeq/habit.hpp"
#include "weakeq/mc.hpp"
#include "weakeq/verifier.hpp"

namespace weakeq::cli {

/// Bad flags, config files or belief specs. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  MarketParams market;
  PreferenceParams prefs;
  double habit_slope = 0.15;
  McConfig mc;
  VerifierOptions verifier;
  std::string belief = "quasi:0.5,0.05,0.15";
};

/// Overlays a JSON document on `cfg`. Schema:
///   { "market":   { "mu", "sigma", "beta" },
///     "prefs":    { "a", "k" },
///     "habit":    { "slope" },
///     "mc":       { "paths", "dt", "seed", "t_max", "bridge_correction", "threads" },
///     "verifier": { "grid_c", "grid_d", "grid_y", "tol", "ss_tol", "d_extent" },
///     "belief":   "quasi:l,b1,b2" | "hyper:a,b" | "file:<path>" }
/// Every key is optional; unknown keys are rejected.
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);
void load_config_file(RunConfig& cfg, const std::string& path);

/// Parses `quasi:`, `hyper:` or `file:` belief specs. File weights summing to
/// within 1e-3 of one are renormalised with a warning on `warn`.
Belief parse_belief(const std::string& spec, std::ostream& warn);

/// Checks every component invariant.
void validate(const RunConfig& cfg);

}  // namespace weakeq::cli
