#include "tanglesim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace tanglesim {

namespace {

void config_check(bool ok, const char* msg) {
  if (!ok) throw ConfigError(msg);
}

// Probe pool size at which one shared past-cone marking becomes cheaper than
// per-issue reachability queries.
constexpr std::size_t kProbeMarkPool = 16;

}  // namespace

void SimConfig::validate() const {
  config_check(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  config_check(std::isfinite(h) && h >= 0.0, "h must be nonnegative");
  config_check(q >= 0.0 && q < 0.5, "q must lie in [0, 1/2)");
  config_check(std::isfinite(alpha) && alpha >= 0.0, "alpha must be nonnegative");
  config_check(p_greedy >= 0.0 && p_greedy <= 1.0, "p_greedy must lie in [0, 1]");
  config_check(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  config_check(theta >= 0.0 && theta <= 1.0, "theta must lie in [0, 1]");
  config_check(std::abs(p_greedy - gamma * theta) <= 1e-9,
               "p_greedy must equal gamma * theta");
  config_check(std::isfinite(k_reattach) && k_reattach > 0.0,
               "K must be positive");
  config_check(m0 >= 1, "M0 must be at least 1");
  config_check(std::isfinite(t_end) && t_end > 0.0, "T_end must be positive");
  config_check(warmup >= 0.0 && warmup < t_end,
               "warmup must lie in [0, T_end)");
  config_check(dense_cap >= 0, "dense_cap must be nonnegative");
  config_check(solver_cap >= 0, "solver_cap must be nonnegative");
  config_check(mc_samples >= 1, "mc_samples must be at least 1");
}

Simulator::Simulator(SimConfig config) : cfg_(config), rng_(config.seed) {
  cfg_.validate();
}

TipPair Simulator::pick_pair(const View& view, StrategyLabel label,
                             LogicalId self) {
  const WalkParams wp = cfg_.walk_params();
  const SolverCaps caps = cfg_.solver_caps();

  // A reissue must dodge the cones of its own earlier issues. That region is
  // fixed for the whole call, so mark it once with a forward pass; draws
  // ending inside it are then rejected without a cone traversal, and the
  // rescue scan below becomes a flag lookup per tip.
  taint_.assign(self == kNoLogical ? 0 : view.size(), 0);
  if (self != kNoLogical) {
    for (const VertexId issue : records_[self].issues)
      if (view.contains(issue)) taint_[issue] = 1;
    for (VertexId w = 1; w < view.size(); ++w) {
      if (taint_[w]) continue;
      const auto& ap = view.vertex(w).approves;
      if (taint_[ap[0]] || taint_[ap[1]]) taint_[w] = 1;
    }
  }
  const auto hits_own_issue = [&](const TipPair& p) {
    return self != kNoLogical && (taint_[p.first] || taint_[p.second]);
  };

  for (int r = 0; r < kConflictRedraws; ++r) {
    const TipPair pair =
        label == StrategyLabel::kS1
            ? select_greedy(view, wp, caps, rng_, &exit_solver_)
            : select_default(view, wp, rng_);
    sim_check(view.is_tip(pair.first) && view.is_tip(pair.second),
              "attach: selected pair must be view tips");
    if (!hits_own_issue(pair) && pair_conflict_free(view, pair)) return pair;
    ++conflict_redraws_;
  }
  // the strategy keeps proposing conflicting pairs; fall back to plain walks
  ++conflict_fallbacks_;
  for (int r = 0; r < kConflictRedraws; ++r) {
    const TipPair pair = select_default(view, wp, rng_);
    if (!hits_own_issue(pair) && pair_conflict_free(view, pair)) return pair;
    ++conflict_redraws_;
  }
  // Walks can keep landing on tips that reference an earlier issue of this
  // transaction even though clean tips exist (a reissue trigger guarantees
  // one: the confirmation walk's tip). Rescue with the newest untainted tip,
  // doubled: a vertex's own cone holds at most one issue per logical by the
  // attach-time invariant, so such a pair is conflict-free.
  const auto tips = view.tips();
  for (auto it = tips.rbegin(); it != tips.rend(); ++it) {
    if (self != kNoLogical && taint_[*it]) continue;
    return TipPair{*it, *it};
  }
  throw SimError("attach: no conflict-free pair after fallback draws");
}

bool Simulator::pair_conflict_free(const View& view, const TipPair& pair) {
  if (!tangle_.has_multi_issue()) return true;
  // Past cones are frozen at attach time, so a pair's verdict never changes:
  // a collision needs two issues of one logical inside the union of the two
  // cones, and membership there is fixed. Memoize per pair; redraw storms
  // retest the same heavy tips constantly.
  const std::uint64_t lo = std::min(pair.first, pair.second);
  const std::uint64_t hi = std::max(pair.first, pair.second);
  const auto [it, fresh] = conflict_cache_.try_emplace((hi << 32) | lo, false);
  if (fresh) it->second = conflict_free(view, pair, kNoLogical);
  return it->second;
}

VertexId Simulator::attach_with_bookkeeping(double t, const TipPair& pair,
                                            StrategyLabel label,
                                            LogicalId logical) {
  const VertexId v = tangle_.attach(pair.first, pair.second, t,
                                    static_cast<std::uint32_t>(label), logical);
  for (const VertexId p : tangle_.vertex(v).approves) {
    const LogicalId pl = tangle_.vertex(p).logical_id;
    if (pl == kNoLogical) continue;  // genesis carries no transaction
    auto& parent_rec = records_[pl];
    if (!parent_rec.first_approval_time) parent_rec.first_approval_time = t;
  }
  return v;
}

LogicalId Simulator::issue_at(double t, const TipPair& pair,
                              StrategyLabel label) {
  sample_series_until(t);
  const auto logical = static_cast<LogicalId>(records_.size());
  TxRecord rec;
  rec.logical_id = logical;
  rec.label = label;
  records_.push_back(std::move(rec));

  const VertexId v = attach_with_bookkeeping(t, pair, label, logical);
  auto& r = records_[logical];
  r.issues.push_back(v);
  r.issue_times.push_back(t);
  ++unconfirmed_;
  deadlines_.emplace_back(t + cfg_.k_reattach, logical);
  open_probe_.push_back(logical);
  return logical;
}

void Simulator::probe(const View& view, double now) {
  const VertexId tip = sample_walk(view, cfg_.walk_params(), rng_);
  // Probed issues are recent, so a reachability query prunes to the few
  // vertices above the issue id and beats marking the tip's whole past cone.
  // A large pool flips the balance toward one shared marking.
  const bool marked = open_probe_.size() >= kProbeMarkPool;
  if (marked) marker_.mark(view, tip);
  const auto sees = [&](VertexId issue) {
    if (marked) return marker_.contains(issue);
    return view.contains(issue) && references(view, tip, issue);
  };
  for (std::size_t i = 0; i < open_probe_.size();) {
    auto& rec = records_[open_probe_[i]];
    if (rec.issue_times[0] >= now) {  // issued this instant, not probed yet
      ++i;
      continue;
    }
    bool referenced = false;
    for (const VertexId issue : rec.issues) {
      if (sees(issue)) {
        referenced = true;
        break;
      }
    }
    rec.probe_outcomes.push_back(!referenced);
    if (!referenced) ++rec.probes_failed;
    if (++rec.probes_done >= cfg_.m0) {
      open_probe_[i] = open_probe_.back();
      open_probe_.pop_back();
    } else {
      ++i;
    }
  }
}

// Reissue only when none of several weight-greedy walks sees any issue. The
// walks differ solely in their frontier tie-breaks, so a dead orphan still
// fails every one of them, but a woven-in transaction that one unlucky tip
// happens to miss is not forked off; a single-walk check misses roughly 2%
// of healthy transactions per deadline, and because a reissue permanently
// bars its cone from merging with the original's, that error rate compounds
// into runaway tip growth.
inline constexpr int kDeadlineWalks = 3;

std::optional<VertexId> Simulator::process_deadline(LogicalId logical,
                                                    double when) {
  auto& rec = records_[logical];
  sim_check(!rec.confirmed, "deadline: record already confirmed");

  const View view = tangle_.snapshot(when, cfg_.h);
  bool referenced = false;
  for (int w = 0; w < kDeadlineWalks && !referenced; ++w) {
    const VertexId tip = deterministic_walk(view, rng_);
    // Newest issue first: reachability explores only ids above the target,
    // so the youngest issue is the cheapest to rule in or out.
    for (auto it = rec.issues.rbegin(); it != rec.issues.rend(); ++it) {
      if (view.contains(*it) && references(view, tip, *it)) {
        referenced = true;
        break;
      }
    }
  }

  const bool first = !rec.first_deadline_confirmed.has_value();
  if (referenced) {
    if (first) rec.first_deadline_confirmed = true;
    rec.confirmed = true;
    rec.confirmed_time = when;
    --unconfirmed_;
    return std::nullopt;
  }
  if (first) rec.first_deadline_confirmed = false;

  const TipPair pair = pick_pair(view, rec.label, logical);
  const VertexId v = attach_with_bookkeeping(when, pair, rec.label, logical);
  auto& r = records_[logical];  // pick_pair may not touch records_, but re-read anyway
  r.issues.push_back(v);
  r.issue_times.push_back(when);
  ++r.reissue_count;
  deadlines_.emplace_back(when + cfg_.k_reattach, logical);
  return v;
}

std::vector<VertexId> Simulator::reattach_check(double now) {
  std::vector<VertexId> reissued;
  while (!deadlines_.empty() && deadlines_.front().first <= now) {
    const auto [when, logical] = deadlines_.front();
    deadlines_.pop_front();
    sample_series_until(when);
    if (const auto v = process_deadline(logical, when)) reissued.push_back(*v);
  }
  return reissued;
}

void Simulator::sample_series_until(double t) {
  while (next_sample_ < t) {
    const auto stamp = next_sample_;
    tip_series_.push_back({stamp, tangle_.live_tip_count()});
    unconfirmed_series_.push_back({stamp, unconfirmed_});
    next_sample_ += 1.0;
  }
}

SimOutput Simulator::run() {
  sim_check(tangle_.size() == 1 && records_.empty(),
            "run: simulator already driven");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double next_arrival = exponential(rng_, cfg_.lambda);
  for (;;) {
    const double next_deadline =
        deadlines_.empty() ? kInf : deadlines_.front().first;
    if (std::min(next_arrival, next_deadline) > cfg_.t_end) break;

    if (next_deadline <= next_arrival) {
      const auto [when, logical] = deadlines_.front();
      deadlines_.pop_front();
      sample_series_until(when);
      process_deadline(logical, when);
      continue;
    }

    const double t = next_arrival;
    next_arrival = t + exponential(rng_, cfg_.lambda);
    sample_series_until(t);

    const View view = tangle_.snapshot(t, cfg_.h);
    const StrategyLabel label = bernoulli(rng_, cfg_.p_greedy)
                                    ? StrategyLabel::kS1
                                    : StrategyLabel::kS0;
    const auto logical = static_cast<LogicalId>(records_.size());
    TxRecord rec;
    rec.logical_id = logical;
    rec.label = label;
    records_.push_back(std::move(rec));

    const TipPair pair = pick_pair(view, label, kNoLogical);
    const VertexId v = attach_with_bookkeeping(t, pair, label, logical);
    auto& r = records_[logical];
    r.issues.push_back(v);
    r.issue_times.push_back(t);
    ++unconfirmed_;
    deadlines_.emplace_back(t + cfg_.k_reattach, logical);
    open_probe_.push_back(logical);

    probe(view, t);
  }

  // trailing samples, the one at T_end included when it lands on the grid
  while (next_sample_ <= cfg_.t_end) {
    tip_series_.push_back({next_sample_, tangle_.live_tip_count()});
    unconfirmed_series_.push_back({next_sample_, unconfirmed_});
    next_sample_ += 1.0;
  }

  SimOutput out;
  out.config = cfg_;
  out.seed = cfg_.seed;
  for (const auto& record : records_) {
    const bool idle =
        cfg_.t_end - record.issue_times.back() > 2.0 * cfg_.k_reattach;
    if (!record.confirmed && record.probes_done < cfg_.m0 && idle) {
      ++out.stale_records;
    }
  }
  out.conflict_redraws = conflict_redraws_;
  out.conflict_fallbacks = conflict_fallbacks_;
  out.records = std::move(records_);
  out.tip_series = std::move(tip_series_);
  out.unconfirmed_series = std::move(unconfirmed_series_);
  out.tangle = std::move(tangle_);
  return out;
}

SimOutput run(const SimConfig& config) { return Simulator(config).run(); }

double confirmation_confidence(const View& view, VertexId v, int m_walks,
                               Rng& rng) {
  sim_check(view.contains(v), "confidence: vertex outside the view");
  sim_check(m_walks > 0, "confidence: need at least one walk");
  int hits = 0;
  for (int i = 0; i < m_walks; ++i) {
    const VertexId tip = deterministic_walk(view, rng);
    if (references(view, tip, v)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m_walks);
}

}  // namespace tanglesim
