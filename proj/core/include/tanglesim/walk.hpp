#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tanglesim/rng.hpp"
#include "tanglesim/tangle.hpp"

namespace tanglesim {

enum class WalkStart : std::uint8_t { kGenesis };

/// Parameters of the tip-selecting random walk. At a non-tip vertex the walk
/// backtracks with total probability q, split per approval edge, and
/// otherwise advances to an in-view approver y with weight exp(-alpha * s)
/// per edge, where s is the cumulative-weight gap. The genesis never
/// backtracks. q < 1/2 keeps the forward drift positive, so the walk is
/// absorbed at a tip.
struct WalkParams {
  double alpha = 0.0;  // 0 = uniform over incoming edges
  double q = 0.0;      // in [0, 1/2)
  WalkStart start = WalkStart::kGenesis;

  void validate() const;  // throws SimError on out-of-range values
};

inline constexpr std::uint64_t kWalkStepCap = 1'000'000;
inline constexpr int kDefaultDenseCap = 512;
inline constexpr int kDefaultSolverCap = 5000;

/// Absorption probabilities of the walk over the view's tips.
struct ExitDistribution {
  struct Entry {
    VertexId tip;
    double p;
  };
  std::vector<Entry> entries;  // ascending tip id

  double prob_of(VertexId tip) const;
  double total() const;
};

/// One-step law at non-tip x: merged per target vertex, backtrack targets
/// first, then approvers, each group ascending by id. Throws when x is a tip
/// or not a view member.
std::vector<std::pair<VertexId, double>> transition_probs(
    const View& view, VertexId x, const WalkParams& params);

/// Runs the walk from its start vertex until a tip absorbs it.
VertexId sample_walk(const View& view, const WalkParams& params, Rng& rng);

/// Weight-greedy walk: always steps to the approver with maximal cumulative
/// weight, uniformly among exact ties, and never backtracks.
VertexId deterministic_walk(const View& view, Rng& rng);
VertexId deterministic_walk(const View& view, Rng& rng,
                            std::vector<VertexId>* path);

/// Exit distribution by linear solve over the absorbing chain: dense
/// elimination below dense_cap view vertices, Gauss-Seidel sweeps above.
ExitDistribution exit_distribution_exact(const View& view,
                                         const WalkParams& params,
                                         int dense_cap = kDefaultDenseCap);

/// Stateful variant of the exact solver. Reusing one instance across
/// snapshots of the same growing tangle warm-starts the iterative path from
/// the previous solution, which cuts the sweep count by an order of
/// magnitude. Results match the stateless op to solver tolerance.
class ExitSolver {
 public:
  ExitDistribution solve(const View& view, const WalkParams& params,
                         int dense_cap = kDefaultDenseCap);

 private:
  std::vector<double> visits_;       // by vertex id, nonzero only off tips
  std::vector<VertexId> trans_;      // non-tip ids, ascending
  std::vector<VertexId> par_[2];     // parent per slot, by transient index
  std::vector<double> pf_[2];        // forward-in constant per slot
  std::vector<std::uint32_t> back_off_;
  std::vector<VertexId> back_ids_;   // in-view non-tip approvers, flattened
  std::vector<double> fwd_scale_;    // (1 - q) / weight sum, by vertex id
  std::vector<std::uint32_t> shift_; // smallest weight gap, by vertex id
};

/// Monte-Carlo estimate from n_samples independent walks.
ExitDistribution exit_distribution_mc(const View& view, const WalkParams& params,
                                      std::uint32_t n_samples, Rng& rng);

/// Total variation distance between two exit distributions.
double total_variation(const ExitDistribution& a, const ExitDistribution& b);

}  // namespace tanglesim
