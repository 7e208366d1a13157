#include "tanglesim/walk.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace tanglesim {

void WalkParams::validate() const {
  sim_check(std::isfinite(alpha) && alpha >= 0.0,
            "walk: alpha must be finite and nonnegative");
  sim_check(q >= 0.0 && q < 0.5, "walk: q must lie in [0, 1/2)");
}

namespace {

// Iterative-solver stopping rules. The sweep loop also checks the absorbed
// mass, so the per-component tolerance only has to get close enough for that
// global residual to take over.
constexpr std::uint64_t kGsSweepCap = 1u << 20;
constexpr double kGsDeltaTol = 1e-12;
constexpr double kGsMassTol = 1e-10;

// exp(-alpha * s) for integer weight gaps, grown lazily. Gaps are shifted by
// the smallest gap at each vertex before lookup, so the largest weight is
// always 1 and distant entries may underflow to zero harmlessly.
struct ExpTable {
  double alpha = -1.0;
  std::vector<double> value;

  void reset(double a) {
    alpha = a;
    value.assign(1, 1.0);
  }
  double operator()(std::uint32_t s) {
    if (s >= value.size()) {
      const std::size_t old = value.size();
      value.resize(std::size_t(s) + 1);
      for (std::size_t d = old; d <= s; ++d) {
        const double e = alpha * static_cast<double>(d);
        value[d] = e > 745.0 ? 0.0 : std::exp(-e);
      }
    }
    return value[s];
  }
};

thread_local ExpTable g_exp_table;

ExpTable& exp_table(double alpha) {
  if (g_exp_table.alpha != alpha) g_exp_table.reset(alpha);
  return g_exp_table;
}

}  // namespace

double ExitDistribution::prob_of(VertexId tip) const {
  const auto it = std::lower_bound(
      entries.begin(), entries.end(), tip,
      [](const Entry& e, VertexId t) { return e.tip < t; });
  return it != entries.end() && it->tip == tip ? it->p : 0.0;
}

double ExitDistribution::total() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.p;
  return sum;
}

std::vector<std::pair<VertexId, double>> transition_probs(
    const View& view, VertexId x, const WalkParams& params) {
  params.validate();
  sim_check(view.contains(x), "transition law: vertex outside the view");
  sim_check(!view.is_tip(x), "transition law: tips have no transitions");

  auto& table = exp_table(params.alpha);
  const double q = x == kGenesis ? 0.0 : params.q;

  std::vector<std::pair<VertexId, double>> out;
  if (x != kGenesis) {
    const auto& parents = view.vertex(x).approves;
    if (parents[0] == parents[1]) {
      out.emplace_back(parents[0], q);
    } else {
      const VertexId lo = std::min(parents[0], parents[1]);
      const VertexId hi = std::max(parents[0], parents[1]);
      out.emplace_back(lo, q / 2.0);
      out.emplace_back(hi, q / 2.0);
    }
  }

  const auto approvers = view.approvers_in_view(x);
  const std::uint32_t wx = view.weight(x);
  std::uint32_t min_gap = 0xffffffffu;
  for (const VertexId y : approvers) {
    const std::uint32_t gap = wx - view.weight(y);
    if (gap < min_gap) min_gap = gap;
  }
  double total = 0.0;
  for (const VertexId y : approvers) total += table(wx - view.weight(y) - min_gap);
  sim_check(total > 0.0, "transition law: forward weights vanished");

  // approver lists are ascending with duplicate edges adjacent
  const double fwd = 1.0 - q;
  for (std::size_t i = 0; i < approvers.size();) {
    const VertexId y = approvers[i];
    double w = 0.0;
    while (i < approvers.size() && approvers[i] == y) {
      w += table(wx - view.weight(y) - min_gap);
      ++i;
    }
    out.emplace_back(y, fwd * w / total);
  }
  return out;
}

VertexId sample_walk(const View& view, const WalkParams& params, Rng& rng) {
  params.validate();
  auto& table = exp_table(params.alpha);
  VertexId x = kGenesis;
  for (std::uint64_t steps = 0;; ++steps) {
    sim_check(steps < kWalkStepCap, "walk: step cap exceeded");
    if (view.is_tip(x)) return x;

    const double q = x == kGenesis ? 0.0 : params.q;
    const double u = uniform01(rng);
    if (u < q) {
      const auto& parents = view.vertex(x).approves;
      x = u < q * 0.5 ? parents[0] : parents[1];
      continue;
    }

    const auto approvers = view.approvers_in_view(x);
    const std::uint32_t wx = view.weight(x);
    std::uint32_t min_gap = 0xffffffffu;
    for (const VertexId y : approvers) {
      const std::uint32_t gap = wx - view.weight(y);
      if (gap < min_gap) min_gap = gap;
    }
    double total = 0.0;
    for (const VertexId y : approvers) total += table(wx - view.weight(y) - min_gap);
    sim_check(total > 0.0, "walk: forward weights vanished");

    // remap the remaining mass of u onto the forward weights
    double r = (u - q) / (1.0 - q) * total;
    VertexId next = approvers.back();
    for (const VertexId y : approvers) {
      r -= table(wx - view.weight(y) - min_gap);
      if (r < 0.0) {
        next = y;
        break;
      }
    }
    x = next;
  }
}

VertexId deterministic_walk(const View& view, Rng& rng) {
  return deterministic_walk(view, rng, nullptr);
}

VertexId deterministic_walk(const View& view, Rng& rng,
                            std::vector<VertexId>* path) {
  thread_local std::vector<VertexId> best;
  VertexId x = kGenesis;
  if (path) {
    path->clear();
    path->push_back(x);
  }
  for (std::uint64_t steps = 0;; ++steps) {
    sim_check(steps < kWalkStepCap, "greedy walk: step cap exceeded");
    if (view.is_tip(x)) return x;

    best.clear();
    std::uint32_t best_w = 0;
    VertexId prev = kNoVertex;
    for (const VertexId y : view.approvers_in_view(x)) {
      if (y == prev) continue;  // duplicate edge, same candidate vertex
      prev = y;
      const std::uint32_t w = view.weight(y);
      if (w > best_w) {
        best_w = w;
        best.clear();
        best.push_back(y);
      } else if (w == best_w) {
        best.push_back(y);
      }
    }
    x = best.size() == 1
            ? best[0]
            : best[uniform_below(rng, static_cast<std::uint32_t>(best.size()))];
    if (path) path->push_back(x);
  }
}

// The solver works on expected visit counts nu over non-tip states:
// nu = e_genesis + Q^T nu, with Q the transition law restricted to non-tips.
// The absorption probability of tip t is then the forward flow into it,
// summed over t's approval edges. Below dense_cap view vertices the linear
// system is eliminated densely; above it Gauss-Seidel sweeps in ascending id
// order resolve the forward flow within a sweep, so only the backtracking
// terms lag and the error contracts at roughly 4q(1-q) per sweep.
ExitDistribution ExitSolver::solve(const View& view, const WalkParams& params,
                                   int dense_cap) {
  params.validate();
  const std::uint32_t n = view.size();
  ExitDistribution dist;
  if (view.is_tip(kGenesis)) {  // genesis-only view
    dist.entries.push_back({kGenesis, 1.0});
    return dist;
  }

  auto& table = exp_table(params.alpha);

  if (visits_.size() < n) visits_.resize(n, 0.0);
  fwd_scale_.assign(n, 0.0);
  shift_.assign(n, 0);
  trans_.clear();
  for (VertexId x = 0; x < n; ++x) {
    if (view.is_tip(x)) {
      visits_[x] = 0.0;  // keep tip entries inert in the backtrack sums
      continue;
    }
    trans_.push_back(x);
    const auto approvers = view.approvers_in_view(x);
    const std::uint32_t wx = view.weight(x);
    std::uint32_t min_gap = 0xffffffffu;
    for (const VertexId y : approvers) {
      const std::uint32_t gap = wx - view.weight(y);
      if (gap < min_gap) min_gap = gap;
    }
    double total = 0.0;
    for (const VertexId y : approvers) total += table(wx - view.weight(y) - min_gap);
    sim_check(total > 0.0, "exit solver: forward weights vanished");
    shift_[x] = min_gap;
    fwd_scale_[x] = (x == kGenesis ? 1.0 : 1.0 - params.q) / total;
  }

  // fwd_scale_[p] * table(weight gap - shift_[p]) is the per-edge forward
  // probability p -> child; absorbed_mass reuses it over the tips' edges.
  const auto absorbed_mass = [&]() {
    double total = 0.0;
    for (const VertexId t : view.tips()) {
      for (const VertexId p : view.vertex(t).approves) {
        total += fwd_scale_[p] * table(view.weight(p) - view.weight(t) - shift_[p]) *
                 visits_[p];
      }
    }
    return total;
  };

  const std::size_t m = trans_.size();
  const double back = params.q / 2.0;
  if (n <= static_cast<std::uint32_t>(dense_cap)) {
    std::vector<std::int32_t> col(n, -1);
    for (std::size_t i = 0; i < m; ++i) col[trans_[i]] = static_cast<std::int32_t>(i);
    const auto dim = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    b[col[kGenesis]] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const VertexId x = trans_[i];
      if (x != kGenesis) {
        // parents of a non-tip view member are themselves non-tips
        for (const VertexId p : view.vertex(x).approves) {
          a(static_cast<Eigen::Index>(i), col[p]) -=
              fwd_scale_[p] * table(view.weight(p) - view.weight(x) - shift_[p]);
        }
      }
      for (const VertexId y : view.approvers_in_view(x)) {
        if (col[y] >= 0) a(static_cast<Eigen::Index>(i), col[y]) -= back;
      }
    }
    const Eigen::VectorXd nu = a.partialPivLu().solve(b);
    for (std::size_t i = 0; i < m; ++i) visits_[trans_[i]] = nu[static_cast<Eigen::Index>(i)];
    sim_check(std::abs(1.0 - absorbed_mass()) <= 1e-9,
              "exit solver: absorption mass off after elimination");
  } else {
    for (int s = 0; s < 2; ++s) {
      par_[s].assign(m, kGenesis);
      pf_[s].assign(m, 0.0);
    }
    back_off_.assign(m + 1, 0);
    back_ids_.clear();
    for (std::size_t i = 0; i < m; ++i) {
      const VertexId x = trans_[i];
      if (x != kGenesis) {
        const auto& parents = view.vertex(x).approves;
        for (int s = 0; s < 2; ++s) {
          par_[s][i] = parents[s];
          pf_[s][i] = fwd_scale_[parents[s]] *
                      table(view.weight(parents[s]) - view.weight(x) - shift_[parents[s]]);
        }
      }
      for (const VertexId y : view.approvers_in_view(x)) {
        if (!view.is_tip(y)) back_ids_.push_back(y);
      }
      back_off_[i + 1] = static_cast<std::uint32_t>(back_ids_.size());
    }

    // Warm starts reuse visits_ from the previous snapshot; the mass residual
    // below guards against stopping on a deceptively small first sweep.
    for (std::uint64_t sweeps = 0;;) {
      sim_check(++sweeps < kGsSweepCap, "exit solver: sweep cap exceeded");
      double delta = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const VertexId x = trans_[i];
        double acc = x == kGenesis ? 1.0 : 0.0;
        acc += pf_[0][i] * visits_[par_[0][i]] + pf_[1][i] * visits_[par_[1][i]];
        double backsum = 0.0;
        for (std::uint32_t j = back_off_[i]; j < back_off_[i + 1]; ++j) {
          backsum += visits_[back_ids_[j]];
        }
        acc += back * backsum;
        const double d = std::abs(acc - visits_[x]);
        if (d > delta) delta = d;
        visits_[x] = acc;
      }
      if (delta <= kGsDeltaTol && std::abs(1.0 - absorbed_mass()) <= kGsMassTol) break;
    }
  }

  dist.entries.reserve(view.tips().size());
  for (const VertexId t : view.tips()) {
    double e = 0.0;
    for (const VertexId p : view.vertex(t).approves) {
      e += fwd_scale_[p] * table(view.weight(p) - view.weight(t) - shift_[p]) *
           visits_[p];
    }
    dist.entries.push_back({t, e});
  }
  return dist;
}

ExitDistribution exit_distribution_exact(const View& view,
                                         const WalkParams& params,
                                         int dense_cap) {
  ExitSolver solver;
  return solver.solve(view, params, dense_cap);
}

ExitDistribution exit_distribution_mc(const View& view, const WalkParams& params,
                                      std::uint32_t n_samples, Rng& rng) {
  params.validate();
  sim_check(n_samples > 0, "exit sampler: need at least one walk");
  std::vector<std::uint32_t> count(view.size(), 0);
  for (std::uint32_t i = 0; i < n_samples; ++i) {
    ++count[sample_walk(view, params, rng)];
  }
  ExitDistribution dist;
  dist.entries.reserve(view.tips().size());
  const double inv = 1.0 / static_cast<double>(n_samples);
  for (const VertexId t : view.tips()) {
    dist.entries.push_back({t, static_cast<double>(count[t]) * inv});
  }
  return dist;
}

double total_variation(const ExitDistribution& a, const ExitDistribution& b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.entries.size() || j < b.entries.size()) {
    if (j == b.entries.size() ||
        (i < a.entries.size() && a.entries[i].tip < b.entries[j].tip)) {
      sum += std::abs(a.entries[i++].p);
    } else if (i == a.entries.size() || b.entries[j].tip < a.entries[i].tip) {
      sum += std::abs(b.entries[j++].p);
    } else {
      sum += std::abs(a.entries[i++].p - b.entries[j++].p);
    }
  }
  return 0.5 * sum;
}

}  // namespace tanglesim
