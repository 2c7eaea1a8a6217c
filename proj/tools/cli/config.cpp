#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "weakeq/errors.hpp"

namespace weakeq::cli {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& section,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw UsageError("config: '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw UsageError("config: unknown key '" + section + "." + key + "'");
  }
}

double number(const json& obj, const char* key, const std::string& section, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw UsageError("config: '" + section + "." + key + "' must be a number");
  return v.get<double>();
}

template <class Int>
Int count(const json& obj, const char* key, const std::string& section, Int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned())
    throw UsageError("config: '" + section + "." + key + "' must be a non-negative integer");
  return v.get<Int>();
}

std::vector<double> split_numbers(const std::string& body, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("belief '" + spec + "': '" + item + "' is not a number");
    }
  }
  return out;
}

Belief read_belief_file(const std::string& path, std::ostream& warn) {
  std::ifstream in(path);
  if (!in) throw UsageError("belief file '" + path + "' cannot be opened");
  std::string line;
  if (!std::getline(in, line)) throw UsageError("belief file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "rate,weight")
    throw UsageError("belief file '" + path + "': header must be 'rate,weight'");
  std::vector<RateAtom> atoms;
  for (int row = 2; std::getline(in, line); ++row) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto v = split_numbers(line, path);
    if (v.size() != 2)
      throw UsageError("belief file '" + path + "' row " + std::to_string(row) +
                       ": expected rate,weight");
    atoms.push_back({v[0], v[1]});
  }
  if (atoms.empty()) throw UsageError("belief file '" + path + "' has no rows");
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!(total >= 0.999 && total <= 1.001)) {
    std::ostringstream msg;
    msg << "belief file '" << path << "': weights sum to " << total << ", outside [0.999, 1.001]";
    throw UsageError(msg.str());
  }
  if (std::abs(total - 1.0) > 1e-12) {
    warn << "warning: belief weights sum to " << total << "; renormalised\n";
    for (auto& a : atoms) a.weight /= total;
  }
  return Belief::from_atoms(std::move(atoms));
}

}  // namespace

void apply_config_json(RunConfig& cfg, const json& doc) {
  only_keys(doc, "<root>", {"market", "prefs", "habit", "mc", "verifier", "belief"});
  if (doc.contains("market")) {
    const auto& m = doc.at("market");
    only_keys(m, "market", {"mu", "sigma", "beta"});
    cfg.market.mu = number(m, "mu", "market", cfg.market.mu);
    cfg.market.sigma = number(m, "sigma", "market", cfg.market.sigma);
    cfg.market.beta = number(m, "beta", "market", cfg.market.beta);
  }
  if (doc.contains("prefs")) {
    const auto& p = doc.at("prefs");
    only_keys(p, "prefs", {"a", "k"});
    cfg.prefs.a = number(p, "a", "prefs", cfg.prefs.a);
    cfg.prefs.k = number(p, "k", "prefs", cfg.prefs.k);
  }
  if (doc.contains("habit")) {
    const auto& h = doc.at("habit");
    only_keys(h, "habit", {"slope"});
    cfg.habit_slope = number(h, "slope", "habit", cfg.habit_slope);
  }
  if (doc.contains("mc")) {
    const auto& m = doc.at("mc");
    only_keys(m, "mc", {"paths", "dt", "seed", "t_max", "bridge_correction", "threads"});
    cfg.mc.paths = count<std::size_t>(m, "paths", "mc", cfg.mc.paths);
    cfg.mc.dt = number(m, "dt", "mc", cfg.mc.dt);
    cfg.mc.seed = count<std::uint64_t>(m, "seed", "mc", cfg.mc.seed);
    if (m.contains("t_max")) cfg.mc.t_max = number(m, "t_max", "mc", 0.0);
    if (m.contains("bridge_correction")) {
      if (!m.at("bridge_correction").is_boolean())
        throw UsageError("config: 'mc.bridge_correction' must be a boolean");
      cfg.mc.bridge_correction = m.at("bridge_correction").get<bool>();
    }
    cfg.mc.threads = count<unsigned>(m, "threads", "mc", cfg.mc.threads);
  }
  if (doc.contains("verifier")) {
    const auto& v = doc.at("verifier");
    only_keys(v, "verifier", {"grid_c", "grid_d", "grid_y", "tol", "ss_tol", "d_extent"});
    auto& o = cfg.verifier;
    o.grid_c = count<std::size_t>(v, "grid_c", "verifier", o.grid_c);
    o.grid_d = count<std::size_t>(v, "grid_d", "verifier", o.grid_d);
    o.grid_y = count<std::size_t>(v, "grid_y", "verifier", o.grid_y);
    o.tol = number(v, "tol", "verifier", o.tol);
    o.ss_tol = number(v, "ss_tol", "verifier", o.ss_tol);
    o.d_extent = number(v, "d_extent", "verifier", o.d_extent);
  }
  if (doc.contains("belief")) {
    if (!doc.at("belief").is_string()) throw UsageError("config: 'belief' must be a string");
    cfg.belief = doc.at("belief").get<std::string>();
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config file '" + path + "' cannot be opened");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  apply_config_json(cfg, doc);
}

Belief parse_belief(const std::string& spec, std::ostream& warn) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw UsageError("belief '" + spec + "': expected quasi:, hyper: or file:");
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  try {
    if (kind == "quasi") {
      const auto v = split_numbers(body, spec);
      if (v.size() != 3) throw UsageError("belief '" + spec + "': quasi needs lambda,beta1,beta2");
      return Belief::quasi_exponential(v[0], v[1], v[2]);
    }
    if (kind == "hyper") {
      const auto v = split_numbers(body, spec);
      if (v.size() != 2) throw UsageError("belief '" + spec + "': hyper needs a,b");
      return Belief::generalized_hyperbolic(v[0], v[1]);
    }
    if (kind == "file") return read_belief_file(body, warn);
  } catch (const DomainError& e) {
    throw UsageError("belief '" + spec + "': " + e.what());
  }
  throw UsageError("belief '" + spec + "': unknown kind '" + kind + "'");
}

void validate(const RunConfig& cfg) {
  try {
    cfg.market.validate();
    cfg.prefs.validate();
    cfg.mc.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (!(cfg.habit_slope >= 0.0 && cfg.habit_slope <= 1.0))
    throw UsageError("habit slope must lie in [0, 1]");
  const auto& v = cfg.verifier;
  if (v.grid_c < 2 || v.grid_d < 2 || v.grid_y < 2)
    throw UsageError("verifier grids need at least 2 points");
  if (!(v.tol > 0.0) || !(v.ss_tol > 0.0)) throw UsageError("verifier tolerances must be positive");
  if (!(v.d_extent > 1.0)) throw UsageError("verifier d_extent must exceed 1");
}

}  // namespace weakeq::cli
