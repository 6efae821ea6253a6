#include "gaillin/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gaillin {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("config " + path + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(key, "expected true/false, got '" + value + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string token;
  while (ss >> token) {
    try {
      if constexpr (std::is_same_v<T, int>)
        out.push_back(std::stoi(token));
      else
        out.push_back(static_cast<T>(std::stoull(token)));
    } catch (const std::exception&) {
      fail(key, "bad list entry '" + token + "'");
    }
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    fail(key, "bad number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    return std::stoi(value);
  } catch (const std::exception&) {
    fail(key, "bad integer '" + value + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) fail("run.seeds", "at least one seed required");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) fail("run.seeds", "seeds must be distinct");
  if (k_grid.empty()) fail("alg.k_grid", "nonempty grid required");
  for (int k : k_grid)
    if (k < 1) fail("alg.k_grid", "grid entries must be >= 1");
  for (int n : n2_grid)
    if (n < 0) fail("alg.n2_grid", "grid entries must be >= 0");
  if (mdp_source == "file") {
    if (mdp_path.empty()) fail("mdp.path", "required when mdp.source = file");
    if (!std::filesystem::exists(mdp_path)) fail("mdp.path", "file not found: " + mdp_path);
  } else if (mdp_source == "tabular-random") {
    if (states < 1 || actions < 1 || horizon < 1)
      fail("mdp", "states/actions/horizon must be >= 1");
  } else {
    fail("mdp.source", "unknown source '" + mdp_source + "'");
  }
  if (n1 < 1) fail("data.n1", "n1 >= 1 required");
  if (n2 < 0) fail("data.n2", "n2 >= 0 required");
  if (behavior != "uniform" && behavior != "expert")
    fail("data.behavior", "unknown behavior '" + behavior + "'");
  if (!(lambda > 0.0)) fail("alg.lambda", "lambda > 0 required");
  if (!(xi > 0.0 && xi < 1.0)) fail("alg.xi", "xi in (0,1) required");
  if (!(kappa_scale >= 0.0)) fail("alg.kappa_scale", "kappa_scale >= 0 required");
  if (!(truth_scale >= 0.0 && truth_scale <= 1.0))
    fail("mdp.truth_scale", "truth_scale in [0,1] required");
  if (mode == Mode::Sweep && k_grid.size() < 2)
    fail("alg.k_grid", "sweep mode needs at least 2 grid points");
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  ExperimentConfig c;
  std::string section = "run";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(path, "bad section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "mdp" && section != "data" && section != "alg")
        fail(path, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(path, "expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = section + "." + key;

    if (section == "run") {
      if (key == "mode") {
        if (value == "ogap")
          c.mode = ExperimentConfig::Mode::Ogap;
        else if (value == "pgap")
          c.mode = ExperimentConfig::Mode::Pgap;
        else if (value == "invariants")
          c.mode = ExperimentConfig::Mode::Invariants;
        else if (value == "sweep")
          c.mode = ExperimentConfig::Mode::Sweep;
        else
          fail(where, "unknown mode '" + value + "'");
      } else if (key == "out_dir") {
        c.out_dir = value;
      } else if (key == "seeds") {
        c.seeds = parse_list<std::uint64_t>(where, value);
      } else if (key == "diagnostics") {
        c.diagnostics = parse_bool(where, value);
      } else if (key == "suite") {
        c.suite = value;
      } else {
        fail(where, "unknown key");
      }
    } else if (section == "mdp") {
      if (key == "source")
        c.mdp_source = value;
      else if (key == "path")
        c.mdp_path = value;
      else if (key == "states")
        c.states = parse_int(where, value);
      else if (key == "actions")
        c.actions = parse_int(where, value);
      else if (key == "horizon")
        c.horizon = parse_int(where, value);
      else if (key == "instance_seed")
        c.instance_seed = std::stoull(value);
      else if (key == "truth_scale")
        c.truth_scale = parse_double(where, value);
      else if (key == "nonneg_rewards")
        c.nonneg_rewards = parse_bool(where, value);
      else
        fail(where, "unknown key");
    } else if (section == "data") {
      if (key == "n1")
        c.n1 = parse_int(where, value);
      else if (key == "n2")
        c.n2 = parse_int(where, value);
      else if (key == "behavior")
        c.behavior = value;
      else
        fail(where, "unknown key");
    } else {  // alg
      if (key == "k_grid")
        c.k_grid = parse_list<int>(where, value);
      else if (key == "n2_grid")
        c.n2_grid = parse_list<int>(where, value);
      else if (key == "alpha")
        c.alpha = parse_double(where, value);
      else if (key == "eta")
        c.eta = parse_double(where, value);
      else if (key == "lambda")
        c.lambda = parse_double(where, value);
      else if (key == "kappa_scale")
        c.kappa_scale = parse_double(where, value);
      else if (key == "xi")
        c.xi = parse_double(where, value);
      else
        fail(where, "unknown key");
    }
  }
  c.validate();
  return c;
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
  if (overrides.seed) config.seeds = {*overrides.seed};
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.diagnostics) config.diagnostics = *overrides.diagnostics;
  config.validate();
}

}  // namespace gaillin
