#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "tanglesim/errors.hpp"

namespace tanglesim {

using VertexId = std::uint32_t;
using LogicalId = std::uint32_t;

inline constexpr VertexId kGenesis = 0;
inline constexpr VertexId kNoVertex = 0xffffffffu;
inline constexpr LogicalId kNoLogical = 0xffffffffu;

/// One transaction in the DAG. Every non-genesis vertex approves exactly two
/// earlier vertices; both slots may name the same vertex, which then carries
/// a multiplicity-2 edge. The genesis approves nothing.
struct Vertex {
  VertexId id = kNoVertex;
  double timestamp = 0.0;
  std::array<VertexId, 2> approves{kNoVertex, kNoVertex};
  std::uint32_t issuer = 0;
  LogicalId logical_id = kNoLogical;
  std::uint32_t reissue_index = 0;

  bool is_genesis() const { return id == kGenesis; }
};

/// Cached state of one snapshot: cumulative weights and the tip set of a
/// prefix of the vertex array. Shared read-only by all users of a View.
struct ViewData {
  std::uint32_t size = 0;              // members are ids [0, size)
  std::vector<std::uint32_t> weight;   // 1 + distinct in-view referencers
  std::vector<VertexId> tips;          // ascending id
};

class Tangle;

/// Immutable snapshot of the tangle as an issuer sees it after the network
/// delay. Ids are assigned in strictly increasing timestamp order, so a view
/// is always a prefix of the vertex array and membership is an id compare.
class View {
 public:
  View() = default;
  View(const Tangle* tangle, double cutoff, std::shared_ptr<const ViewData> data)
      : tangle_(tangle), cutoff_(cutoff), data_(std::move(data)) {}

  std::uint32_t size() const { return data_->size; }
  double cutoff_time() const { return cutoff_; }
  bool contains(VertexId v) const { return v < data_->size; }
  bool is_tip(VertexId v) const;  // no approver inside the view
  std::uint32_t weight(VertexId v) const { return data_->weight[v]; }
  std::span<const VertexId> tips() const { return data_->tips; }
  const Vertex& vertex(VertexId v) const;
  const Tangle& tangle() const { return *tangle_; }

  // Incoming edges whose source is itself a view member. Approver lists are
  // stored in ascending id order, so this is a prefix of the full list.
  std::span<const VertexId> approvers_in_view(VertexId v) const;

 private:
  const Tangle* tangle_ = nullptr;
  double cutoff_ = 0.0;
  std::shared_ptr<const ViewData> data_;
};

/// Append-only DAG of transactions. Attach order defines the id order, and
/// timestamps must be strictly increasing. Snapshots reuse an incrementally
/// advanced weight cache, so taking views at nondecreasing cutoffs is cheap.
class Tangle {
 public:
  Tangle();

  /// Adds a vertex approving (parent_a, parent_b). Returns its id.
  VertexId attach(VertexId parent_a, VertexId parent_b, double timestamp,
                  std::uint32_t issuer, LogicalId logical_id);

  std::uint32_t size() const { return static_cast<std::uint32_t>(vertices_.size()); }
  const Vertex& vertex(VertexId v) const { return vertices_[v]; }
  double timestamp(VertexId v) const { return timestamps_[v]; }
  std::span<const VertexId> approvers(VertexId v) const {
    return approvers_[v];
  }
  /// Id of a vertex's earliest approver, or kNoVertex while it is a tip.
  VertexId first_approver(VertexId v) const { return first_approver_[v]; }
  std::uint32_t live_tip_count() const { return live_tips_; }

  /// All issues sharing a logical id, in issue order. Null when unseen.
  const std::vector<VertexId>* issues_of(LogicalId id) const;
  bool has_multi_issue() const { return multi_issue_count_ > 0; }
  bool vertex_has_siblings(VertexId v) const { return multi_flag_[v] != 0; }

  /// Snapshot of everything with timestamp <= now - h. Before the first
  /// delay has elapsed the view holds only the genesis. Advances the weight
  /// cache when cutoffs are nondecreasing; earlier cutoffs recompute.
  View snapshot(double now, double h);

 private:
  struct EngineState {
    std::uint32_t n = 1;
    std::vector<std::uint32_t> weight;
    std::vector<VertexId> tips;         // unsorted, with position index
    std::vector<std::uint32_t> tip_pos;
  };

  void advance(EngineState& st, std::uint32_t target,
               std::vector<std::uint32_t>& mark, std::uint32_t& epoch) const;
  std::shared_ptr<const ViewData> publish(const EngineState& st) const;

  std::vector<Vertex> vertices_;
  std::vector<double> timestamps_;  // mirror of vertices_ for binary search
  std::vector<std::vector<VertexId>> approvers_;
  std::vector<VertexId> first_approver_;
  std::vector<std::uint8_t> multi_flag_;
  std::unordered_map<LogicalId, std::vector<VertexId>> logical_index_;
  std::uint32_t multi_issue_count_ = 0;
  std::uint32_t live_tips_ = 1;

  EngineState engine_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  std::shared_ptr<const ViewData> cached_;
};

inline Tangle new_tangle() { return Tangle(); }

inline bool View::is_tip(VertexId v) const {
  const VertexId fa = tangle_->first_approver(v);
  return fa == kNoVertex || fa >= data_->size;
}

inline const Vertex& View::vertex(VertexId v) const { return tangle_->vertex(v); }

/// Weight of x inside the view: 1 plus the number of distinct view members
/// that reference it. Throws when x is not a view member.
std::uint32_t cumulative_weight(const View& view, VertexId x);

/// True when u reaches v along approval edges, counting u == v as reaching.
bool references(const View& view, VertexId u, VertexId v);

/// Strict ancestors of x inside the view, ascending. x itself is excluded.
std::vector<VertexId> past_cone(const View& view, VertexId x);

/// Strict descendants of x inside the view (vertices referencing x), ascending.
std::vector<VertexId> future_cone(const View& view, VertexId x);

/// Graphviz dump: vertex labels are "id:weight", one edge line per approval
/// slot, so multiplicity-2 edges appear twice.
void write_dot(const View& view, std::ostream& os);

/// Reusable ancestor marking for hot paths (probe checks, conflict scans).
/// Marks survive until the next mark() call; no per-call allocation once the
/// buffers have grown to the tangle size.
class PastConeMarker {
 public:
  /// Marks root and every vertex it references.
  void mark(const View& view, VertexId root);
  bool contains(VertexId v) const {
    return v < mark_.size() && mark_[v] == epoch_;
  }

 private:
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  std::vector<VertexId> stack_;
};

}  // namespace tanglesim
