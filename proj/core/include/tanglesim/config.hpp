#pragma once

#include <string>
#include <vector>

#include "tanglesim/simulator.hpp"

namespace tanglesim {

enum class Mode : std::uint8_t { kSingle, kSweep, kCdf, kLittle };

const char* mode_name(Mode mode);

struct ExperimentSpec {
  Mode mode = Mode::kSingle;
  SimConfig sim;
  std::vector<double> p_grid;      // sweep grid, ascending
  int replicas = 1;
  std::vector<double> gamma_list;  // deviating fractions reported in sweeps
  int n_nodes = 100;               // deviation step for stability is gamma/n_nodes
  std::string out_dir = "out";

  bool operator==(const ExperimentSpec&) const = default;
};

/// Parses the flat key=value format. '#' starts a comment, blank lines are
/// skipped, unknown keys and missing required keys are errors. Required:
/// lambda, q, h, alpha, M0, T_end.
ExperimentSpec parse_config(const std::string& text);

/// Echo of the fully resolved experiment in the same format; parsing it
/// again reproduces the configuration exactly.
std::string render_manifest(const ExperimentSpec& spec);

}  // namespace tanglesim
