#include "tanglesim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tanglesim {

RunCostStats cost_stats(const SimOutput& output) {
  RunCostStats stats;
  const SimConfig& cfg = output.config;
  for (const auto& rec : output.records) {
    if (rec.issue_times.empty()) continue;
    if (rec.issue_times[0] < cfg.warmup) continue;
    if (rec.probes_done != cfg.m0) continue;
    const double cost = static_cast<double>(rec.probes_failed) /
                        static_cast<double>(cfg.m0);
    LabelStats& s = rec.label == StrategyLabel::kS0 ? stats.s0 : stats.s1;
    s.cost_sum += cost;
    s.cost_sq_sum += cost * cost;
    ++s.n;
  }
  return stats;
}

namespace {

struct LabelSummary {
  std::optional<double> mean, se;
  std::size_t n = 0;
};

LabelSummary summarize_label(std::span<const RunCostStats> stats, bool s1) {
  LabelSummary out;
  double pooled_sum = 0.0;
  double pooled_sq = 0.0;
  std::vector<double> replica_means;
  for (const auto& run : stats) {
    const LabelStats& s = s1 ? run.s1 : run.s0;
    if (s.n == 0) continue;
    pooled_sum += s.cost_sum;
    pooled_sq += s.cost_sq_sum;
    out.n += s.n;
    replica_means.push_back(s.cost_sum / static_cast<double>(s.n));
  }
  if (out.n == 0) return out;
  const auto n = static_cast<double>(out.n);
  out.mean = pooled_sum / n;

  if (replica_means.size() >= 2) {
    // spread of per-replica means; replicas are the independent units
    const auto r = static_cast<double>(replica_means.size());
    double mean_of_means = 0.0;
    for (const double m : replica_means) mean_of_means += m;
    mean_of_means /= r;
    double var = 0.0;
    for (const double m : replica_means) {
      var += (m - mean_of_means) * (m - mean_of_means);
    }
    var /= r - 1.0;
    out.se = std::sqrt(var / r);
  } else if (out.n >= 2) {
    const double var = (pooled_sq - n * *out.mean * *out.mean) / (n - 1.0);
    out.se = std::sqrt(std::max(0.0, var) / n);
  }
  return out;
}

}  // namespace

CostSummary summarize_cost_stats(std::span<const RunCostStats> stats,
                                 double p_greedy) {
  CostSummary out;
  out.p_greedy = p_greedy;
  const LabelSummary s0 = summarize_label(stats, false);
  const LabelSummary s1 = summarize_label(stats, true);
  out.mean_s0 = s0.mean;
  out.se_s0 = s0.se;
  out.n_s0 = s0.n;
  out.mean_s1 = s1.mean;
  out.se_s1 = s1.se;
  out.n_s1 = s1.n;
  return out;
}

CostSummary mean_costs(std::span<const SimOutput> outputs) {
  sim_check(!outputs.empty(), "cost summary: no runs given");
  std::vector<RunCostStats> stats;
  stats.reserve(outputs.size());
  for (const auto& o : outputs) stats.push_back(cost_stats(o));
  return summarize_cost_stats(stats, outputs[0].config.p_greedy);
}

std::vector<double> approval_cdf(std::span<const SimOutput> outputs,
                                 std::span<const double> grid) {
  sim_check(!outputs.empty(), "approval cdf: no runs given");
  sim_check(!grid.empty(), "approval cdf: empty delay grid");
  sim_check(std::is_sorted(grid.begin(), grid.end()),
            "approval cdf: grid must ascend");

  std::vector<std::size_t> counts(grid.size(), 0);
  std::size_t eligible = 0;
  for (const auto& output : outputs) {
    const SimConfig& cfg = output.config;
    for (const auto& rec : output.records) {
      if (rec.reissue_count != 0 || rec.issue_times.empty()) continue;
      const double issued = rec.issue_times[0];
      // the whole grid must fit before t_end, otherwise late transactions
      // would be censored and bias the tail downward
      if (issued < cfg.warmup || issued + grid.back() > cfg.t_end) continue;
      ++eligible;
      if (!rec.first_approval_time) continue;
      const double delay = *rec.first_approval_time - issued;
      const auto it = std::lower_bound(grid.begin(), grid.end(), delay);
      for (std::size_t i = static_cast<std::size_t>(it - grid.begin());
           i < grid.size(); ++i) {
        ++counts[i];
      }
    }
  }
  sim_check(eligible > 0, "approval cdf: no eligible transactions");

  std::vector<double> cdf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cdf[i] = static_cast<double>(counts[i]) / static_cast<double>(eligible);
  }
  return cdf;
}

LittleResult little_check(std::span<const SimOutput> outputs, double k_deadline,
                          double lambda) {
  sim_check(!outputs.empty(), "queue check: no runs given");
  sim_check(k_deadline > 0.0 && lambda > 0.0,
            "queue check: K and lambda must be positive");

  LittleResult res;
  std::size_t decided = 0;
  std::size_t confirmed_first = 0;
  double level_sum = 0.0;
  std::size_t level_n = 0;
  for (const auto& output : outputs) {
    const SimConfig& cfg = output.config;
    for (const auto& rec : output.records) {
      if (rec.issue_times.empty() || rec.issue_times[0] < cfg.warmup) continue;
      if (!rec.first_deadline_confirmed) continue;  // deadline fell past t_end
      ++decided;
      if (*rec.first_deadline_confirmed) ++confirmed_first;
    }
    for (const auto& sample : output.unconfirmed_series) {
      if (sample.time < cfg.warmup) continue;
      level_sum += static_cast<double>(sample.value);
      ++level_n;
    }
  }
  if (decided == 0 || level_n == 0) return res;  // valid stays false

  res.p_hat = static_cast<double>(confirmed_first) / static_cast<double>(decided);
  res.observed = level_sum / static_cast<double>(level_n);
  if (res.p_hat <= 0.0) return res;
  res.predicted = lambda * k_deadline / res.p_hat;
  res.ratio = res.observed / res.predicted;
  res.valid = true;
  return res;
}

double relative_cost_increase(double cost_at_p, double cost_at_zero) {
  sim_check(cost_at_zero > 0.0, "relative cost: zero baseline");
  return (cost_at_p - cost_at_zero) / cost_at_zero;
}

}  // namespace tanglesim
