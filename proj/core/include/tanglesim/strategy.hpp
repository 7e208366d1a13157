#pragma once

#include "tanglesim/walk.hpp"

namespace tanglesim {

enum class StrategyKind : std::uint8_t { kDefault, kGreedy, kMixed };

struct SolverCaps {
  int dense_cap = kDefaultDenseCap;
  int solver_cap = kDefaultSolverCap;  // largest view solved exactly
  std::uint32_t mc_samples = 1000;     // walks used past the cap
};

struct Strategy {
  StrategyKind kind = StrategyKind::kDefault;
  WalkParams params;
  double theta = 0.0;  // greedy probability, mixed strategy only
};

struct TipPair {
  VertexId first = kNoVertex;
  VertexId second = kNoVertex;
};

inline constexpr int kDistinctRedraws = 10;  // retries of the second walk
inline constexpr int kConflictRedraws = 20;  // retries before default fallback

/// Two independent walks; on a duplicate the second walk is re-run up to
/// kDistinctRedraws times, after which the duplicate pair stands.
TipPair select_default(const View& view, const WalkParams& params, Rng& rng);

/// Top two tips of the default walk's exit distribution, exact while the
/// view fits the solver cap and Monte-Carlo beyond it. Probability ties are
/// broken uniformly at random. A caller holding an ExitSolver across calls
/// on the same growing tangle passes it to warm-start the exact path.
TipPair select_greedy(const View& view, const WalkParams& params,
                      const SolverCaps& caps, Rng& rng,
                      ExitSolver* solver = nullptr);

/// Greedy with probability theta, default otherwise.
TipPair select_mixed(const View& view, double theta, const WalkParams& params,
                     const SolverCaps& caps, Rng& rng,
                     ExitSolver* solver = nullptr);

TipPair select(const View& view, const Strategy& strategy,
               const SolverCaps& caps, Rng& rng, ExitSolver* solver = nullptr);

/// True when the union of the pair's past cones (the pair included) holds at
/// most one vertex per logical id. self_logical, when given, marks the
/// transaction being attached as already having issues, so any of its prior
/// issues inside the cones is a conflict.
bool conflict_free(const View& view, const TipPair& pair,
                   LogicalId self_logical = kNoLogical);

}  // namespace tanglesim
