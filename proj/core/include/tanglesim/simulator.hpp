#pragma once

#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "tanglesim/strategy.hpp"

namespace tanglesim {

enum class StrategyLabel : std::uint8_t { kS0 = 0, kS1 = 1 };

struct SimConfig {
  double lambda = 0.0;      // arrival rate per second, reissues excluded
  double h = 1.0;           // network delay: issuers see the tangle h ago
  double q = 1.0 / 3.0;     // walk backtracking probability
  double alpha = 0.01;      // walk weight bias
  double p_greedy = 0.0;    // fraction of arrivals labeled greedy (= gamma * theta)
  double gamma = 1.0;       // fraction of issuers willing to deviate
  double theta = 0.0;       // their greedy mixture weight
  double k_reattach = 20.0; // seconds before an unreferenced tx is reissued
  std::uint32_t m0 = 0;     // probe walks counted per transaction
  double t_end = 0.0;
  double warmup = 0.0;      // statistics ignore transactions issued before this
  std::uint64_t seed = 1;
  int dense_cap = kDefaultDenseCap;
  int solver_cap = kDefaultSolverCap;
  std::uint32_t mc_samples = 1000;

  WalkParams walk_params() const { return {alpha, q, WalkStart::kGenesis}; }
  SolverCaps solver_caps() const { return {dense_cap, solver_cap, mc_samples}; }
  void validate() const;  // throws ConfigError naming the violated bound
  bool operator==(const SimConfig&) const = default;
};

/// Per logical transaction bookkeeping. Reissues extend the same record.
struct TxRecord {
  LogicalId logical_id = kNoLogical;
  StrategyLabel label = StrategyLabel::kS0;
  std::vector<VertexId> issues;
  std::vector<double> issue_times;
  std::optional<double> first_approval_time;
  std::vector<bool> probe_outcomes;  // true = probe tip missed every issue
  std::uint32_t probes_failed = 0;   // count of true entries
  std::uint32_t probes_done = 0;
  std::uint32_t reissue_count = 0;
  bool confirmed = false;
  std::optional<double> confirmed_time;
  std::optional<bool> first_deadline_confirmed;
};

struct SeriesSample {
  double time = 0.0;
  std::uint32_t value = 0;
};

struct SimOutput {
  SimConfig config;
  Tangle tangle;
  std::vector<TxRecord> records;  // index equals logical id
  std::vector<SeriesSample> tip_series;          // live tip count, 1 Hz
  std::vector<SeriesSample> unconfirmed_series;  // issued but unconfirmed, 1 Hz
  std::uint64_t conflict_redraws = 0;    // pairs rejected by the conflict check
  std::uint64_t conflict_fallbacks = 0;  // attachments that fell back to default draws
  std::uint32_t stale_records = 0;  // unresolved past twice the reissue deadline
  std::uint64_t seed = 0;
};

/// Discrete-event run: Poisson arrivals attach via their labeled strategy on
/// the delayed view, one shared probe walk per arrival scores every open
/// record, and per-issue deadline events confirm or reissue transactions.
/// The test drivers issue_at / reattach_check allow hand-built scenarios.
class Simulator {
 public:
  explicit Simulator(SimConfig config);

  SimOutput run();

  /// Manually issues a transaction at time t with a hand-picked pair,
  /// bypassing strategy selection. Returns its logical id.
  LogicalId issue_at(double t, const TipPair& pair, StrategyLabel label);

  /// Processes every deadline due at or before now: a transaction none of
  /// the weight-greedy confirmation walks references is reissued through
  /// its strategy. Returns the reissued vertex ids.
  std::vector<VertexId> reattach_check(double now);

  Tangle& tangle() { return tangle_; }
  const std::vector<TxRecord>& records() const { return records_; }

 private:
  VertexId attach_with_bookkeeping(double t, const TipPair& pair,
                                   StrategyLabel label, LogicalId logical);
  TipPair pick_pair(const View& view, StrategyLabel label, LogicalId self);
  bool pair_conflict_free(const View& view, const TipPair& pair);
  void probe(const View& view, double now);
  std::optional<VertexId> process_deadline(LogicalId logical, double when);
  void sample_series_until(double t);

  SimConfig cfg_;
  Tangle tangle_;
  Rng rng_;
  ExitSolver exit_solver_;  // warm-started across greedy selections
  std::vector<TxRecord> records_;
  std::deque<std::pair<double, LogicalId>> deadlines_;  // FIFO by construction
  std::vector<LogicalId> open_probe_;
  PastConeMarker marker_;
  std::vector<std::uint8_t> taint_;  // cones of a reissuer's prior issues
  std::unordered_map<std::uint64_t, bool> conflict_cache_;  // verdict per pair
  std::uint32_t unconfirmed_ = 0;
  double next_sample_ = 0.0;
  std::vector<SeriesSample> tip_series_;
  std::vector<SeriesSample> unconfirmed_series_;
  std::uint64_t conflict_redraws_ = 0;
  std::uint64_t conflict_fallbacks_ = 0;
};

SimOutput run(const SimConfig& config);

/// Fraction of m weight-greedy walks whose tip references v.
double confirmation_confidence(const View& view, VertexId v, int m_walks,
                               Rng& rng);

}  // namespace tanglesim
