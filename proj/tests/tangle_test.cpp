#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <vector>

#include "support/builders.hpp"
#include "tanglesim/tangle.hpp"

using namespace tanglesim;

TEST_CASE("fresh tangle holds only the genesis") {
  Tangle tangle;
  CHECK(tangle.size() == 1);
  CHECK(tangle.live_tip_count() == 1);
  CHECK(tangle.first_approver(kGenesis) == kNoVertex);

  View view = tangle.snapshot(0.0, 0.0);
  CHECK(view.size() == 1);
  CHECK(view.is_tip(kGenesis));
  CHECK(view.weight(kGenesis) == 1);
  REQUIRE(view.tips().size() == 1);
  CHECK(view.tips()[0] == kGenesis);
}

TEST_CASE("attach rejects unknown parents and stale timestamps") {
  Tangle tangle;
  CHECK_THROWS_AS(tangle.attach(1, 0, 1.0, 0, 0), SimError);
  tangle.attach(0, 0, 1.0, 0, 0);
  CHECK_THROWS_AS(tangle.attach(0, 0, 1.0, 0, 1), SimError);
  CHECK_THROWS_AS(tangle.attach(0, 0, 0.5, 0, 1), SimError);
}

TEST_CASE("hand-built dags match their paper weights and tip sets") {
  for (auto& dag : testdag::all_dags()) {
    CAPTURE(dag.name);
    View view = testdag::full_view(dag.tangle);
    REQUIRE(view.size() == dag.weights.size());
    for (VertexId v = 0; v < view.size(); ++v) {
      CAPTURE(v);
      CHECK(view.weight(v) == dag.weights[v]);
      CHECK(cumulative_weight(view, v) == dag.weights[v]);
    }
    std::vector<VertexId> tips(view.tips().begin(), view.tips().end());
    CHECK(tips == dag.tips);
    for (VertexId v = 0; v < view.size(); ++v) {
      const bool expected =
          std::find(dag.tips.begin(), dag.tips.end(), v) != dag.tips.end();
      CHECK(view.is_tip(v) == expected);
    }
  }
}

TEST_CASE("views are timestamp prefixes with their own tip sets") {
  auto dag = testdag::worked4();
  Tangle& tangle = dag.tangle;

  // Before the first delay has elapsed only the genesis is visible.
  View early = tangle.snapshot(0.5, 1.0);
  CHECK(early.size() == 1);
  CHECK(early.is_tip(kGenesis));

  // Cutoff 1.5 admits the genesis and v1; v1 is the sole tip there.
  View mid = tangle.snapshot(2.5, 1.0);
  CHECK(mid.size() == 2);
  CHECK(mid.contains(1));
  CHECK_FALSE(mid.contains(2));
  CHECK(mid.is_tip(1));
  CHECK_FALSE(mid.is_tip(kGenesis));
  CHECK(mid.weight(kGenesis) == 2);
  CHECK(mid.weight(1) == 1);

  // The boundary is inclusive: cutoff exactly at a timestamp admits it.
  View edge = tangle.snapshot(3.0, 1.0);
  CHECK(edge.size() == 3);
}

TEST_CASE("approver lists carry edge multiplicity and clip to the view") {
  auto dag = testdag::wide6();
  View full = testdag::full_view(dag.tangle);

  // v5 approves v2 twice, so v2's incoming list holds it twice.
  auto approvers = full.approvers_in_view(2);
  std::vector<VertexId> got(approvers.begin(), approvers.end());
  CHECK(got == std::vector<VertexId>{4, 5, 5});
  CHECK(std::is_sorted(got.begin(), got.end()));

  // A view cut before v5 sees only the v4 edge.
  View cut = dag.tangle.snapshot(4.0, 0.0);
  auto clipped = cut.approvers_in_view(2);
  CHECK(std::vector<VertexId>(clipped.begin(), clipped.end()) ==
        std::vector<VertexId>{4});
}

TEST_CASE("weight equals one plus the future cone size") {
  Tangle tangle = testdag::random_tangle(200, 920, 16);
  View view = testdag::full_view(tangle);
  for (VertexId v = 0; v < view.size(); ++v) {
    CAPTURE(v);
    CHECK(view.weight(v) == future_cone(view, v).size() + 1);
  }
}

TEST_CASE("advancing and rewinding snapshots agree with a fresh build") {
  const std::uint64_t seed = 4242;
  Tangle grown = testdag::random_tangle(300, seed, 12);

  auto check_against_fresh = [&](double cutoff) {
    View a = grown.snapshot(cutoff, 0.0);
    Tangle fresh = testdag::random_tangle(300, seed, 12);
    View b = fresh.snapshot(cutoff, 0.0);
    REQUIRE(a.size() == b.size());
    for (VertexId v = 0; v < a.size(); ++v) {
      CHECK(a.weight(v) == b.weight(v));
    }
    CHECK(std::vector<VertexId>(a.tips().begin(), a.tips().end()) ==
          std::vector<VertexId>(b.tips().begin(), b.tips().end()));
  };

  // Forward through the incremental engine, then a rewind, then forward again.
  check_against_fresh(50.0);
  check_against_fresh(120.5);
  check_against_fresh(121.0);
  check_against_fresh(60.0);
  check_against_fresh(299.0);
}

TEST_CASE("snapshots taken before later growth stay frozen") {
  Tangle tangle;
  tangle.attach(0, 0, 1.0, 0, 0);
  View before = tangle.snapshot(1.0, 0.0);
  CHECK(before.size() == 2);
  CHECK(before.is_tip(1));

  tangle.attach(1, 1, 2.0, 0, 1);
  View after = tangle.snapshot(2.0, 0.0);
  CHECK(before.size() == 2);       // old view unchanged
  CHECK(before.weight(0) == 2);
  CHECK_FALSE(after.is_tip(1));
  CHECK(after.weight(0) == 3);
}

TEST_CASE("every vertex references the genesis and itself") {
  Tangle tangle = testdag::random_tangle(150, 31, 10);
  View view = testdag::full_view(tangle);
  for (VertexId v = 0; v < view.size(); ++v) {
    CHECK(references(view, v, v));
    CHECK(references(view, v, kGenesis));
  }
  CHECK_FALSE(references(view, kGenesis, 1));
}

TEST_CASE("cones on the mesh match hand enumeration") {
  auto dag = testdag::mesh12();
  View view = testdag::full_view(dag.tangle);

  CHECK(past_cone(view, 7) == std::vector<VertexId>{0, 1, 2, 3, 4, 5});
  CHECK(future_cone(view, 7) == std::vector<VertexId>{9, 10, 11});
  CHECK(past_cone(view, kGenesis).empty());
  CHECK(future_cone(view, 11).empty());

  tanglesim::PastConeMarker marker;
  marker.mark(view, 7);
  const auto past = past_cone(view, 7);
  for (VertexId v = 0; v < view.size(); ++v) {
    const bool in_past =
        v == 7 || std::find(past.begin(), past.end(), v) != past.end();
    CHECK(marker.contains(v) == in_past);
  }

  // Re-marking resets the previous cone: 5 was marked through 7 but lies
  // outside the past of 6.
  marker.mark(view, 6);
  CHECK(marker.contains(3));
  CHECK_FALSE(marker.contains(5));
  CHECK_FALSE(marker.contains(7));
}

TEST_CASE("logical ids track reissues") {
  Tangle tangle;
  tangle.attach(0, 0, 1.0, 0, 7);
  CHECK_FALSE(tangle.has_multi_issue());
  CHECK_FALSE(tangle.vertex_has_siblings(1));

  tangle.attach(0, 0, 2.0, 0, 7);
  CHECK(tangle.has_multi_issue());
  CHECK(tangle.vertex_has_siblings(1));
  CHECK(tangle.vertex_has_siblings(2));

  const auto* issues = tangle.issues_of(7);
  REQUIRE(issues != nullptr);
  CHECK(*issues == std::vector<VertexId>{1, 2});
  CHECK(tangle.issues_of(99) == nullptr);
}

TEST_CASE("first approver and live tip count stay current") {
  auto dag = testdag::wide6();
  Tangle& tangle = dag.tangle;
  CHECK(tangle.live_tip_count() == 3);
  CHECK(tangle.first_approver(1) == 3);  // v3 arrived before v4
  CHECK(tangle.first_approver(5) == kNoVertex);

  tangle.attach(3, 4, 6.0, 0, 6);
  CHECK(tangle.live_tip_count() == 2);  // two tips consumed, one added
  CHECK(tangle.first_approver(3) == 6);
}

TEST_CASE("dot dump lists one line per approval slot") {
  auto dag = testdag::diamond4();
  View view = testdag::full_view(dag.tangle);
  std::ostringstream os;
  write_dot(view, os);
  const std::string dot = os.str();

  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("0:4") != std::string::npos);  // genesis label carries weight
  std::size_t edges = 0;
  for (std::size_t at = dot.find("->"); at != std::string::npos;
       at = dot.find("->", at + 2)) {
    ++edges;
  }
  CHECK(edges == 6);  // three vertices, two slots each
}

TEST_CASE("view lookups reject non-members") {
  auto dag = testdag::chain3();
  View view = dag.tangle.snapshot(1.0, 0.0);  // genesis and v1 only
  CHECK_THROWS_AS(cumulative_weight(view, 2), SimError);
  CHECK_THROWS_AS(past_cone(view, 2), SimError);
  CHECK_THROWS_AS(future_cone(view, 2), SimError);
}
