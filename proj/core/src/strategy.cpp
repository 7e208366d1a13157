#include "tanglesim/strategy.hpp"

#include <algorithm>

namespace tanglesim {

namespace {

// Exit probabilities closer than this count as tied; the solver leaves
// symmetric tips a few ulps apart, well inside this band, while genuinely
// distinct tips sit orders of magnitude outside it.
constexpr double kTieTol = 1e-9;

TipPair top_two(const ExitDistribution& dist, Rng& rng) {
  const auto& entries = dist.entries;
  sim_check(!entries.empty(), "greedy selection: empty exit distribution");
  if (entries.size() == 1) return {entries[0].tip, entries[0].tip};

  thread_local std::vector<std::uint32_t> cluster;
  const auto n = static_cast<std::uint32_t>(entries.size());

  double best = -1.0;
  for (const auto& e : entries) best = std::max(best, e.p);
  cluster.clear();
  for (std::uint32_t i = 0; i < n; ++i) {
    if (entries[i].p >= best - kTieTol) cluster.push_back(i);
  }
  const std::uint32_t a =
      cluster[uniform_below(rng, static_cast<std::uint32_t>(cluster.size()))];

  double second = -1.0;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (i != a) second = std::max(second, entries[i].p);
  }
  cluster.clear();
  for (std::uint32_t i = 0; i < n; ++i) {
    if (i != a && entries[i].p >= second - kTieTol) cluster.push_back(i);
  }
  const std::uint32_t b =
      cluster[uniform_below(rng, static_cast<std::uint32_t>(cluster.size()))];
  return {entries[a].tip, entries[b].tip};
}

}  // namespace

TipPair select_default(const View& view, const WalkParams& params, Rng& rng) {
  TipPair pair;
  pair.first = sample_walk(view, params, rng);
  pair.second = sample_walk(view, params, rng);
  for (int r = 0; r < kDistinctRedraws && pair.second == pair.first; ++r) {
    pair.second = sample_walk(view, params, rng);
  }
  return pair;  // a surviving duplicate stands, becoming a double edge
}

TipPair select_greedy(const View& view, const WalkParams& params,
                      const SolverCaps& caps, Rng& rng, ExitSolver* solver) {
  ExitDistribution dist;
  if (view.size() <= static_cast<std::uint32_t>(caps.solver_cap)) {
    dist = solver ? solver->solve(view, params, caps.dense_cap)
                  : exit_distribution_exact(view, params, caps.dense_cap);
  } else {
    dist = exit_distribution_mc(view, params, caps.mc_samples, rng);
  }
  return top_two(dist, rng);
}

TipPair select_mixed(const View& view, double theta, const WalkParams& params,
                     const SolverCaps& caps, Rng& rng, ExitSolver* solver) {
  sim_check(theta >= 0.0 && theta <= 1.0, "mixed selection: theta outside [0, 1]");
  return bernoulli(rng, theta) ? select_greedy(view, params, caps, rng, solver)
                               : select_default(view, params, rng);
}

TipPair select(const View& view, const Strategy& strategy,
               const SolverCaps& caps, Rng& rng, ExitSolver* solver) {
  switch (strategy.kind) {
    case StrategyKind::kDefault:
      return select_default(view, strategy.params, rng);
    case StrategyKind::kGreedy:
      return select_greedy(view, strategy.params, caps, rng, solver);
    case StrategyKind::kMixed:
      return select_mixed(view, strategy.theta, strategy.params, caps, rng,
                          solver);
  }
  throw SimError("selection: unknown strategy kind");
}

bool conflict_free(const View& view, const TipPair& pair,
                   LogicalId self_logical) {
  sim_check(view.contains(pair.first) && view.contains(pair.second),
            "conflict scan: pair outside the view");
  const Tangle& tangle = view.tangle();
  // Without a doubly-issued logical id anywhere there is nothing to collide.
  if (!tangle.has_multi_issue() && self_logical == kNoLogical) return true;

  thread_local std::vector<std::uint32_t> mark;
  thread_local std::uint32_t epoch = 0;
  thread_local std::vector<VertexId> stack;
  thread_local std::vector<LogicalId> flagged_seen;

  if (mark.size() < view.size()) mark.resize(view.size(), 0);
  if (++epoch == 0) {
    std::fill(mark.begin(), mark.end(), 0);
    epoch = 1;
  }
  stack.clear();
  flagged_seen.clear();

  const auto push = [&](VertexId v) {
    if (mark[v] != epoch) {
      mark[v] = epoch;
      stack.push_back(v);
    }
  };
  push(pair.first);
  push(pair.second);
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    const Vertex& vx = view.vertex(v);
    if (self_logical != kNoLogical && vx.logical_id == self_logical) return false;
    if (tangle.vertex_has_siblings(v)) {
      for (const LogicalId seen : flagged_seen) {
        if (seen == vx.logical_id) return false;
      }
      flagged_seen.push_back(vx.logical_id);
    }
    if (v == kGenesis) continue;
    push(vx.approves[0]);
    push(vx.approves[1]);
  }
  return true;
}

}  // namespace tanglesim
