#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tanglesim/csv.hpp"

using namespace tanglesim;

namespace {

constexpr std::uint32_t kDotVertexCap = 2000;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<SimOutput> run_replicas(const SimConfig& base, int replicas) {
  std::vector<SimOutput> outputs;
  outputs.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    SimConfig cfg = base;
    cfg.seed = replicas == 1 ? base.seed
                             : derive_seed(base.seed, static_cast<std::uint64_t>(r));
    outputs.push_back(run(cfg));
  }
  return outputs;
}

// Delay grid for the approval distribution: quarter-second steps out to a
// minute, clipped so the whole grid fits between warmup and t_end.
std::vector<double> delay_grid(const SimConfig& cfg) {
  constexpr double kStep = 0.25;
  constexpr double kHorizon = 60.0;
  const double limit = std::min(kHorizon, cfg.t_end - cfg.warmup);
  std::vector<double> grid;
  for (double t = kStep; t <= limit; t += kStep) grid.push_back(t);
  if (grid.empty()) grid.push_back(limit);
  return grid;
}

int run_tool(const ExperimentSpec& spec, bool dump_dot) {
  const std::filesystem::path out(spec.out_dir);
  write_file_atomic(out / "manifest.txt", render_manifest(spec));

  switch (spec.mode) {
    case Mode::kSingle: {
      SimOutput output = run(spec.sim);
      write_file_atomic(out / "transactions.csv", transactions_csv(output));
      write_file_atomic(out / "tips.csv", series_csv(output.tip_series, "L"));
      write_file_atomic(out / "unconfirmed.csv",
                        series_csv(output.unconfirmed_series, "count"));
      if (dump_dot) {
        if (output.tangle.size() < kDotVertexCap) {
          std::ostringstream dot;
          write_dot(output.tangle.snapshot(spec.sim.t_end, 0.0), dot);
          write_file_atomic(out / "tangle.dot", dot.str());
        } else {
          std::cerr << "skipping dot dump: " << output.tangle.size()
                    << " vertices exceed the cap of " << kDotVertexCap << "\n";
        }
      }
      return 0;
    }

    case Mode::kSweep: {
      const CostCurves curves = sweep(spec.sim, spec.p_grid, spec.replicas);
      const EquilibriumReport report =
          analyze(curves, spec.gamma_list, spec.n_nodes);
      write_file_atomic(out / "costs.csv", costs_csv(curves));
      write_file_atomic(out / "equilibrium.csv", equilibrium_csv(curves, report));
      for (std::size_t i = 0; i < curves.p_grid.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%02zu.csv", i);
        write_file_atomic(out / name, point_costs_csv(curves, i));
      }
      for (const auto& failure : curves.failures) {
        std::cerr << "run failed: " << failure << "\n";
      }
      return curves.failures.empty() ? 0 : 3;
    }

    case Mode::kCdf: {
      const auto outputs = run_replicas(spec.sim, spec.replicas);
      const auto grid = delay_grid(spec.sim);
      const auto cdf = approval_cdf(outputs, grid);
      write_file_atomic(out / "cdf.csv", cdf_csv(grid, cdf));
      return 0;
    }

    case Mode::kLittle: {
      const auto outputs = run_replicas(spec.sim, spec.replicas);
      const LittleResult result =
          little_check(outputs, spec.sim.k_reattach, spec.sim.lambda);
      write_file_atomic(out / "little.csv",
                        little_csv(result, spec.sim.lambda, spec.sim.k_reattach));
      return 0;
    }
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tangle attachment-strategy simulator"};
  std::string config_path;
  std::string mode_override;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool dump_dot = false;

  app.add_option("--config", config_path, "experiment config file")->required();
  auto* mode_opt =
      app.add_option("--mode", mode_override, "override the config mode")
          ->check(CLI::IsMember({"single", "sweep", "cdf", "little"}));
  auto* seed_opt = app.add_option("--seed", seed_override, "override the seed");
  auto* out_opt = app.add_option("--out", out_override, "override the output directory");
  app.add_flag("--dump-dot", dump_dot,
               "write a graphviz dump of the final tangle (single mode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentSpec spec = parse_config(read_file(config_path));
    if (mode_opt->count() > 0) {
      if (mode_override == "single") spec.mode = Mode::kSingle;
      if (mode_override == "sweep") spec.mode = Mode::kSweep;
      if (mode_override == "cdf") spec.mode = Mode::kCdf;
      if (mode_override == "little") spec.mode = Mode::kLittle;
    }
    if (seed_opt->count() > 0) spec.sim.seed = seed_override;
    if (out_opt->count() > 0) spec.out_dir = out_override;
    if (spec.mode == Mode::kSweep) {
      if (spec.p_grid.empty()) spec.p_grid = default_p_grid();
      if (spec.gamma_list.empty()) spec.gamma_list = {1.0};
    }
    return run_tool(spec, dump_dot);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
