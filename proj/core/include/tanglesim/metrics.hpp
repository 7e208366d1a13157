#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "tanglesim/simulator.hpp"

namespace tanglesim {

// Sums over cost-eligible records of one run and label. A record is eligible
// once it was issued after warmup and its probe window completed in-run.
struct LabelStats {
  double cost_sum = 0.0;
  double cost_sq_sum = 0.0;
  std::size_t n = 0;
};

struct RunCostStats {
  LabelStats s0, s1;
};

RunCostStats cost_stats(const SimOutput& output);

struct CostSummary {
  std::optional<double> mean_s0, se_s0;
  std::optional<double> mean_s1, se_s1;
  std::size_t n_s0 = 0, n_s1 = 0;
  double p_greedy = 0.0;
};

/// Pools eligible records across replica runs. Standard errors come from the
/// replica-level spread of means; a single replica falls back to the
/// within-run spread.
CostSummary mean_costs(std::span<const SimOutput> outputs);
CostSummary summarize_cost_stats(std::span<const RunCostStats> stats,
                                 double p_greedy);

/// Empirical P[approval delay <= grid[i]] over never-reissued transactions
/// issued after warmup and early enough that the whole grid fits before
/// t_end. Unapproved transactions stay in the denominator.
std::vector<double> approval_cdf(std::span<const SimOutput> outputs,
                                 std::span<const double> grid);

struct LittleResult {
  double observed = 0.0;   // time-averaged count of issued-but-unconfirmed
  double predicted = 0.0;  // lambda * K / p_hat
  double ratio = 0.0;
  double p_hat = 0.0;      // fraction confirmed at their first deadline
  bool valid = false;
};

LittleResult little_check(std::span<const SimOutput> outputs, double k_deadline,
                          double lambda);

/// (cost_at_p - cost_at_zero) / cost_at_zero. Throws on a zero baseline.
double relative_cost_increase(double cost_at_p, double cost_at_zero);

}  // namespace tanglesim
