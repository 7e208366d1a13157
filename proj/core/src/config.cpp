#include "tanglesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace tanglesim {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kSingle:
      return "single";
    case Mode::kSweep:
      return "sweep";
    case Mode::kCdf:
      return "cdf";
    case Mode::kLittle:
      return "little";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ", ";
    out += p;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_uint64(const std::string& key, const std::string& value) {
  try {
    if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad unsigned integer for " + key + ": '" +
                      value + "'");
  }
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = value.find(',', start);
    const std::string item =
        trim(comma == std::string::npos ? value.substr(start)
                                        : value.substr(start, comma - start));
    if (item.empty()) throw ConfigError("config: empty item in " + key);
    out.push_back(parse_double(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
  static const std::set<std::string> kKnown = {
      "mode",       "lambda",     "h",        "q",          "alpha",
      "p_greedy",   "gamma",      "theta",    "K",          "M0",
      "T_end",      "warmup",     "seed",     "dense_cap",  "solver_cap",
      "mc_samples", "p_grid",     "replicas", "gamma_list", "n_nodes",
      "out_dir"};

  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: empty key on line " + std::to_string(line_no));
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key " + key);
    }
  }

  std::vector<std::string> unknown;
  for (const auto& [key, value] : kv) {
    if (!kKnown.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    throw ConfigError("config: unknown keys: " + join(unknown));
  }

  std::vector<std::string> missing;
  for (const char* req : {"lambda", "q", "h", "alpha", "M0", "T_end"}) {
    if (!kv.count(req)) missing.push_back(req);
  }
  if (!missing.empty()) {
    throw ConfigError("config: missing required keys: " + join(missing));
  }

  const auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  ExperimentSpec spec;
  SimConfig& sim = spec.sim;
  sim.lambda = parse_double("lambda", *get("lambda"));
  sim.h = parse_double("h", *get("h"));
  sim.q = parse_double("q", *get("q"));
  sim.alpha = parse_double("alpha", *get("alpha"));
  sim.t_end = parse_double("T_end", *get("T_end"));
  const long long m0 = parse_int("M0", *get("M0"));
  if (m0 < 1 || m0 > 0xffffffffll) throw ConfigError("M0 must be at least 1");
  sim.m0 = static_cast<std::uint32_t>(m0);

  if (const auto v = get("K")) sim.k_reattach = parse_double("K", *v);
  if (const auto v = get("warmup")) sim.warmup = parse_double("warmup", *v);
  if (const auto v = get("seed")) sim.seed = parse_uint64("seed", *v);
  if (const auto v = get("dense_cap")) {
    sim.dense_cap = static_cast<int>(parse_int("dense_cap", *v));
  }
  if (const auto v = get("solver_cap")) {
    sim.solver_cap = static_cast<int>(parse_int("solver_cap", *v));
  }
  if (const auto v = get("mc_samples")) {
    const long long n = parse_int("mc_samples", *v);
    if (n < 1 || n > 0xffffffffll) throw ConfigError("mc_samples must be at least 1");
    sim.mc_samples = static_cast<std::uint32_t>(n);
  }

  const bool has_p = kv.count("p_greedy") != 0;
  const bool has_gamma = kv.count("gamma") != 0;
  const bool has_theta = kv.count("theta") != 0;
  if (has_p && !has_gamma && !has_theta) {
    sim.p_greedy = parse_double("p_greedy", *get("p_greedy"));
    sim.gamma = 1.0;
    sim.theta = sim.p_greedy;
  } else if (!has_p && has_gamma && has_theta) {
    sim.gamma = parse_double("gamma", *get("gamma"));
    sim.theta = parse_double("theta", *get("theta"));
    sim.p_greedy = sim.gamma * sim.theta;
  } else if (has_p && has_gamma && has_theta) {
    sim.p_greedy = parse_double("p_greedy", *get("p_greedy"));
    sim.gamma = parse_double("gamma", *get("gamma"));
    sim.theta = parse_double("theta", *get("theta"));
    if (std::abs(sim.p_greedy - sim.gamma * sim.theta) > 1e-9) {
      throw ConfigError("config: p_greedy is inconsistent with gamma * theta");
    }
  } else if (has_p || has_gamma || has_theta) {
    throw ConfigError("config: give p_greedy alone, or gamma with theta");
  }

  if (const auto v = get("mode")) {
    if (*v == "single") {
      spec.mode = Mode::kSingle;
    } else if (*v == "sweep") {
      spec.mode = Mode::kSweep;
    } else if (*v == "cdf") {
      spec.mode = Mode::kCdf;
    } else if (*v == "little") {
      spec.mode = Mode::kLittle;
    } else {
      throw ConfigError("config: unknown mode '" + *v + "'");
    }
  }

  if (const auto v = get("p_grid")) {
    spec.p_grid = parse_list("p_grid", *v);
    for (const double p : spec.p_grid) {
      if (p < 0.0 || p > 1.0) throw ConfigError("p_grid values must lie in [0, 1]");
    }
    for (std::size_t i = 1; i < spec.p_grid.size(); ++i) {
      if (spec.p_grid[i] <= spec.p_grid[i - 1]) {
        throw ConfigError("p_grid must ascend strictly");
      }
    }
  }
  if (const auto v = get("replicas")) {
    const long long n = parse_int("replicas", *v);
    if (n < 1 || n > 1000000) throw ConfigError("replicas must be at least 1");
    spec.replicas = static_cast<int>(n);
  }
  if (const auto v = get("gamma_list")) {
    spec.gamma_list = parse_list("gamma_list", *v);
    for (const double g : spec.gamma_list) {
      if (g <= 0.0 || g > 1.0) throw ConfigError("gamma_list values must lie in (0, 1]");
    }
  }
  if (const auto v = get("n_nodes")) {
    const long long n = parse_int("n_nodes", *v);
    if (n < 1 || n > 1000000000) throw ConfigError("n_nodes must be at least 1");
    spec.n_nodes = static_cast<int>(n);
  }
  if (const auto v = get("out_dir")) {
    if (v->empty()) throw ConfigError("out_dir must not be empty");
    spec.out_dir = *v;
  }

  sim.validate();
  return spec;
}

std::string render_manifest(const ExperimentSpec& spec) {
  const SimConfig& sim = spec.sim;
  std::string out;
  out += "mode=" + std::string(mode_name(spec.mode)) + "\n";
  out += "lambda=" + num17(sim.lambda) + "\n";
  out += "h=" + num17(sim.h) + "\n";
  out += "q=" + num17(sim.q) + "\n";
  out += "alpha=" + num17(sim.alpha) + "\n";
  out += "p_greedy=" + num17(sim.p_greedy) + "\n";
  out += "gamma=" + num17(sim.gamma) + "\n";
  out += "theta=" + num17(sim.theta) + "\n";
  out += "K=" + num17(sim.k_reattach) + "\n";
  out += "M0=" + std::to_string(sim.m0) + "\n";
  out += "T_end=" + num17(sim.t_end) + "\n";
  out += "warmup=" + num17(sim.warmup) + "\n";
  out += "seed=" + std::to_string(sim.seed) + "\n";
  out += "dense_cap=" + std::to_string(sim.dense_cap) + "\n";
  out += "solver_cap=" + std::to_string(sim.solver_cap) + "\n";
  out += "mc_samples=" + std::to_string(sim.mc_samples) + "\n";
  out += "replicas=" + std::to_string(spec.replicas) + "\n";
  out += "n_nodes=" + std::to_string(spec.n_nodes) + "\n";
  out += "out_dir=" + spec.out_dir + "\n";
  if (!spec.p_grid.empty()) {
    out += "p_grid=";
    for (std::size_t i = 0; i < spec.p_grid.size(); ++i) {
      if (i) out += ",";
      out += num17(spec.p_grid[i]);
    }
    out += "\n";
  }
  if (!spec.gamma_list.empty()) {
    out += "gamma_list=";
    for (std::size_t i = 0; i < spec.gamma_list.size(); ++i) {
      if (i) out += ",";
      out += num17(spec.gamma_list[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace tanglesim
