#include "tanglesim/tangle.hpp"

#include <algorithm>
#include <ostream>

namespace tanglesim {

Tangle::Tangle() {
  Vertex genesis;
  genesis.id = kGenesis;
  genesis.timestamp = 0.0;
  genesis.issuer = 0;
  vertices_.push_back(genesis);
  timestamps_.push_back(0.0);
  approvers_.emplace_back();
  first_approver_.push_back(kNoVertex);
  multi_flag_.push_back(0);
  engine_.weight.push_back(1);
  engine_.tips.push_back(kGenesis);
  engine_.tip_pos.push_back(0);
}

VertexId Tangle::attach(VertexId parent_a, VertexId parent_b, double timestamp,
                        std::uint32_t issuer, LogicalId logical_id) {
  const VertexId id = size();
  sim_check(parent_a < id && parent_b < id, "attach: unknown parent id");
  sim_check(timestamp > timestamps_.back(),
            "attach: timestamps must be strictly increasing");

  Vertex v;
  v.id = id;
  v.timestamp = timestamp;
  v.approves = {parent_a, parent_b};
  v.issuer = issuer;
  v.logical_id = logical_id;

  if (logical_id != kNoLogical) {
    auto& issues = logical_index_[logical_id];
    v.reissue_index = static_cast<std::uint32_t>(issues.size());
    issues.push_back(id);
    if (issues.size() == 2) {
      ++multi_issue_count_;
      multi_flag_[issues[0]] = 1;
    }
  }

  vertices_.push_back(v);
  timestamps_.push_back(timestamp);
  approvers_.emplace_back();
  first_approver_.push_back(kNoVertex);
  multi_flag_.push_back(v.reissue_index > 0 ? 1 : 0);

  ++live_tips_;
  approvers_[parent_a].push_back(id);
  approvers_[parent_b].push_back(id);
  for (const VertexId p : {parent_a, parent_b}) {
    if (first_approver_[p] == kNoVertex) {
      first_approver_[p] = id;
      --live_tips_;
    }
    if (parent_a == parent_b) break;  // one distinct parent
  }
  return id;
}

const std::vector<VertexId>* Tangle::issues_of(LogicalId id) const {
  const auto it = logical_index_.find(id);
  return it == logical_index_.end() ? nullptr : &it->second;
}

std::span<const VertexId> View::approvers_in_view(VertexId v) const {
  const auto full = tangle_->approvers(v);
  // Approver lists grow in id order, so in-view approvers are a prefix.
  const auto end = std::partition_point(
      full.begin(), full.end(), [n = data_->size](VertexId a) { return a < n; });
  return full.first(static_cast<std::size_t>(end - full.begin()));
}

void Tangle::advance(EngineState& st, std::uint32_t target,
                     std::vector<std::uint32_t>& mark,
                     std::uint32_t& epoch) const {
  constexpr std::uint32_t kNoPos = 0xffffffffu;
  st.weight.resize(target);
  st.tip_pos.resize(target, kNoPos);
  if (mark.size() < target) mark.resize(target, 0);

  std::vector<VertexId> stack;
  for (VertexId v = st.n; v < target; ++v) {
    st.weight[v] = 1;
    st.tip_pos[v] = static_cast<std::uint32_t>(st.tips.size());
    st.tips.push_back(v);

    const auto& parents = vertices_[v].approves;
    for (const VertexId p : {parents[0], parents[1]}) {
      // v is p's first approver exactly when p now stops being a tip.
      if (first_approver_[p] == v && st.tip_pos[p] != kNoPos) {
        const std::uint32_t pos = st.tip_pos[p];
        const VertexId moved = st.tips.back();
        st.tips[pos] = moved;
        st.tip_pos[moved] = pos;
        st.tips.pop_back();
        st.tip_pos[p] = kNoPos;
      }
      if (parents[0] == parents[1]) break;
    }

    // Every ancestor of v gains one referencing vertex.
    ++epoch;
    if (epoch == 0) {  // counter wrapped; start a fresh marking era
      std::fill(mark.begin(), mark.end(), 0);
      epoch = 1;
    }
    stack.clear();
    for (const VertexId p : {parents[0], parents[1]}) {
      if (mark[p] != epoch) {
        mark[p] = epoch;
        stack.push_back(p);
      }
    }
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      ++st.weight[u];
      if (u == kGenesis) continue;
      const auto& up = vertices_[u].approves;
      for (const VertexId p : {up[0], up[1]}) {
        if (mark[p] != epoch) {
          mark[p] = epoch;
          stack.push_back(p);
        }
      }
    }
  }
  st.n = target;
}

std::shared_ptr<const ViewData> Tangle::publish(const EngineState& st) const {
  auto data = std::make_shared<ViewData>();
  data->size = st.n;
  data->weight.assign(st.weight.begin(), st.weight.begin() + st.n);
  data->tips = st.tips;
  std::sort(data->tips.begin(), data->tips.end());
  return data;
}

View Tangle::snapshot(double now, double h) {
  sim_check(now >= 0.0 && h >= 0.0, "snapshot: now and h must be nonnegative");
  const double cutoff = now - h;
  auto n = static_cast<std::uint32_t>(
      std::upper_bound(timestamps_.begin(), timestamps_.end(), cutoff) -
      timestamps_.begin());
  if (n == 0) n = 1;  // before the first delay elapses only genesis is visible

  if (n >= engine_.n) {
    if (n > engine_.n) {
      advance(engine_, n, mark_, epoch_);
      cached_.reset();
    }
    if (!cached_ || cached_->size != n) cached_ = publish(engine_);
    return View(this, cutoff, cached_);
  }

  // Earlier cutoff than the cache: rebuild that prefix from scratch.
  EngineState st;
  st.weight.push_back(1);
  st.tips.push_back(kGenesis);
  st.tip_pos.push_back(0);
  std::vector<std::uint32_t> mark;
  std::uint32_t epoch = 0;
  advance(st, n, mark, epoch);
  return View(this, cutoff, publish(st));
}

std::uint32_t cumulative_weight(const View& view, VertexId x) {
  sim_check(view.contains(x), "cumulative_weight: vertex not in view");
  return view.weight(x);
}

bool references(const View& view, VertexId u, VertexId v) {
  sim_check(view.contains(u) && view.contains(v),
            "references: vertex not in view");
  if (u == v) return true;
  if (v > u) return false;  // approvals only point to older ids
  thread_local std::vector<VertexId> stack;
  thread_local std::vector<std::uint32_t> mark;
  thread_local std::uint32_t epoch = 0;
  if (mark.size() < view.size()) mark.resize(view.size(), 0);
  if (++epoch == 0) {
    std::fill(mark.begin(), mark.end(), 0);
    epoch = 1;
  }
  stack.clear();
  stack.push_back(u);
  mark[u] = epoch;
  while (!stack.empty()) {
    const VertexId cur = stack.back();
    stack.pop_back();
    if (cur == kGenesis) continue;
    for (const VertexId p : view.vertex(cur).approves) {
      if (p == v) return true;
      // Ancestors of ids below v can never reach back up to v.
      if (p < v || mark[p] == epoch) continue;
      mark[p] = epoch;
      stack.push_back(p);
    }
  }
  return false;
}

std::vector<VertexId> past_cone(const View& view, VertexId x) {
  sim_check(view.contains(x), "past_cone: vertex not in view");
  std::vector<std::uint8_t> seen(view.size(), 0);
  std::vector<VertexId> stack{x};
  seen[x] = 1;
  std::vector<VertexId> cone;
  while (!stack.empty()) {
    const VertexId cur = stack.back();
    stack.pop_back();
    if (cur == kGenesis) continue;
    for (const VertexId p : view.vertex(cur).approves) {
      if (!seen[p]) {
        seen[p] = 1;
        cone.push_back(p);
        stack.push_back(p);
      }
    }
  }
  std::sort(cone.begin(), cone.end());
  return cone;
}

std::vector<VertexId> future_cone(const View& view, VertexId x) {
  sim_check(view.contains(x), "future_cone: vertex not in view");
  std::vector<std::uint8_t> seen(view.size(), 0);
  std::vector<VertexId> stack{x};
  seen[x] = 1;
  std::vector<VertexId> cone;
  while (!stack.empty()) {
    const VertexId cur = stack.back();
    stack.pop_back();
    for (const VertexId a : view.approvers_in_view(cur)) {
      if (!seen[a]) {
        seen[a] = 1;
        cone.push_back(a);
        stack.push_back(a);
      }
    }
  }
  std::sort(cone.begin(), cone.end());
  return cone;
}

void write_dot(const View& view, std::ostream& os) {
  os << "digraph tangle_view {\n";
  os << "  rankdir=RL;\n";
  os << "  node [shape=box];\n";
  for (VertexId v = 0; v < view.size(); ++v) {
    os << "  " << v << " [label=\"" << v << ":" << view.weight(v) << "\"];\n";
  }
  for (VertexId v = 1; v < view.size(); ++v) {
    for (const VertexId p : view.vertex(v).approves) {
      os << "  " << v << " -> " << p << ";\n";
    }
  }
  os << "}\n";
}

void PastConeMarker::mark(const View& view, VertexId root) {
  sim_check(view.contains(root), "PastConeMarker: root not in view");
  if (mark_.size() < view.size()) mark_.resize(view.size(), 0);
  if (++epoch_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    epoch_ = 1;
  }
  stack_.clear();
  stack_.push_back(root);
  mark_[root] = epoch_;
  while (!stack_.empty()) {
    const VertexId cur = stack_.back();
    stack_.pop_back();
    if (cur == kGenesis) continue;
    for (const VertexId p : view.vertex(cur).approves) {
      if (mark_[p] != epoch_) {
        mark_[p] = epoch_;
        stack_.push_back(p);
      }
    }
  }
}

}  // namespace tanglesim
