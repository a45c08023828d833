#include <gtest/gtest.h>

#include <random>
#include <set>

#include "detdag/dsep.hpp"
#include "support/brute_dsep.hpp"
#include "support/fixtures.hpp"
#include "support/random_dag.hpp"

using namespace detdag;
using detdag::testing::BruteSeparation;
using detdag::testing::fixture;

namespace {

Dag chain() {
  return DagBuilder("t").probabilistic("A").probabilistic("B").probabilistic("C")
      .edge("A", "B").edge("B", "C").build();
}

Dag collider() {
  return DagBuilder("t").probabilistic("A").probabilistic("B").probabilistic("C")
      .edge("A", "B").edge("C", "B").build();
}

Dag scaled_fork() {
  return DagBuilder("t").probabilistic("A").probabilistic("B").probabilistic("C")
      .edge("A", "B").edge("A", "C").define("D", FunctionalForm::scale("A", 2)).build();
}

std::set<std::size_t> indices(const Dag& dag, const NodeSet& ids) {
  std::set<std::size_t> out;
  for (const auto& id : ids) out.insert(dag.index_of(id));
  return out;
}

// Whether the witness is a real path whose every step is open given `closure`.
void expect_active(const Dag& dag, const Path& p, const NodeSet& closure) {
  ASSERT_GE(p.steps.size(), 2u);
  ASSERT_EQ(p.edges.size() + 1, p.steps.size());
  NodeMask z = dag.mask_of(closure);
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    const auto& e = p.edges[i];
    bool forward = e.from == p.steps[i].node && e.to == p.steps[i + 1].node;
    bool backward = e.to == p.steps[i].node && e.from == p.steps[i + 1].node;
    ASSERT_TRUE(forward || backward);
    ASSERT_NE(dag.find_edge(dag.index_of(e.from), dag.index_of(e.to)), nullptr);
  }
  for (std::size_t i = 1; i + 1 < p.steps.size(); ++i) {
    std::size_t v = dag.index_of(p.steps[i].node);
    if (p.steps[i].role == StepRole::Collider) {
      NodeMask desc = descendant_mask(dag, v);
      bool opened = z[v];
      for (std::size_t w = 0; w < dag.size(); ++w) opened = opened || (desc[w] && z[w]);
      EXPECT_TRUE(opened);
      EXPECT_EQ(p.edges[i - 1].to, p.steps[i].node);
      EXPECT_EQ(p.edges[i].to, p.steps[i].node);
    } else {
      EXPECT_FALSE(z[v]);
    }
  }
}

}  // namespace

TEST(Closure, Examples) {
  Dag fig3 = fixture("fig3");
  EXPECT_EQ(det_closure(fig3, {"X1", "X2", "X3"}), (NodeSet{"X1", "X2", "X3", "X"}));
  EXPECT_EQ(det_closure(fig3, {"X", "X1", "X2"}), (NodeSet{"X1", "X2", "X3", "X"}));
  EXPECT_TRUE(det_closure(fig3, {}).empty());
  EXPECT_THROW(det_closure(fig3, {"Q"}), UnknownNode);
}

TEST(Closure, NonInvertibleFormsOnlyPropagateForward) {
  Dag fig1a = fixture("fig1a");
  EXPECT_EQ(det_closure(fig1a, {"B"}), (NodeSet{"B", "M"}));
  EXPECT_EQ(det_closure(fig1a, {"M"}), (NodeSet{"M"}));
  Dag fig2c = fixture("fig2c");
  EXPECT_EQ(det_closure(fig2c, {"X1_j", "N_j"}), (NodeSet{"N_j", "X1_j"}));
}

TEST(Closure, ChainsAndInversion) {
  Dag dag = DagBuilder("t").probabilistic("A").probabilistic("B")
                .define("S", FunctionalForm::sum({"A", "B"}))
                .define("T", FunctionalForm::scale("S", 3))
                .build();
  EXPECT_EQ(det_closure(dag, {"T", "A"}), (NodeSet{"A", "B", "S", "T"}));
  Dag ratio0 = DagBuilder("t").probabilistic("A").define("P", FunctionalForm::power("A", 0)).build();
  EXPECT_EQ(det_closure(ratio0, {"P"}), (NodeSet{"P"}));
}

TEST(Closure, MonotoneAndIdempotentOnRandomGraphs) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Dag dag = detdag::testing::random_det_dag(rng);
    BruteSeparation brute(dag);
    NodeSet all;
    for (const auto& n : dag.nodes()) all.push_back(n.id);
    for (const auto& z : detdag::testing::subsets(all, 3)) {
      NodeSet d = det_closure(dag, z);
      for (const auto& v : z) EXPECT_NE(std::find(d.begin(), d.end(), v), d.end());
      EXPECT_EQ(det_closure(dag, d), d);
      EXPECT_EQ(indices(dag, d), brute.closure(indices(dag, z)));
    }
  }
}

TEST(ClassicSeparation, Examples) {
  EXPECT_TRUE(is_d_separated(chain(), "A", "C", {"B"}).separated);
  EXPECT_FALSE(is_d_separated(chain(), "A", "C", {}).separated);
  EXPECT_TRUE(is_d_separated(collider(), "A", "C", {}).separated);
  auto v = is_d_separated(collider(), "A", "C", {"B"});
  ASSERT_FALSE(v.separated);
  ASSERT_TRUE(v.witness);
  EXPECT_EQ(v.witness->to_string(), "A→B←C");
  EXPECT_EQ(v.witness->steps[1].role, StepRole::Collider);
  auto fig3 = is_d_separated(fixture("fig3"), "X1", "X2", {"X"});
  EXPECT_FALSE(fig3.separated);
  EXPECT_EQ(fig3.witness->to_string(), "X1⇒X⇐X2");
}

TEST(ClassicSeparation, Preconditions) {
  EXPECT_THROW(is_d_separated(chain(), "A", "A", {}), QueryError);
  EXPECT_THROW(is_d_separated(chain(), "A", "C", {"A"}), QueryError);
  EXPECT_THROW(is_d_separated(chain(), "A", "Q", {}), UnknownNode);
}

TEST(ClassicSeparation, ColliderOpenedThroughDescendant) {
  Dag dag = DagBuilder("t").probabilistic("A").probabilistic("B").probabilistic("C").probabilistic("D")
                .edge("A", "B").edge("C", "B").edge("B", "D").build();
  auto v = is_d_separated(dag, "A", "C", {"D"});
  ASSERT_FALSE(v.separated);
  EXPECT_EQ(v.witness->steps[1].via, std::optional<NodeId>("D"));
}

TEST(DeterministicSeparation, Examples) {
  EXPECT_TRUE(is_D_separated(scaled_fork(), "B", "C", {"D"}).separated);
  EXPECT_FALSE(is_d_separated(scaled_fork(), "B", "C", {"D"}).separated);
  EXPECT_THROW(is_D_separated(fixture("fig1a"), "M", "Y", {"B"}), DegenerateQuery);
  EXPECT_EQ(D_separation_outcome(fixture("fig1a"), "M", "Y", {"B"}), SeparationOutcome::Degenerate);
  auto fig3 = is_D_separated(fixture("fig3"), "X1", "X2", {"X"});
  EXPECT_FALSE(fig3.separated);
  EXPECT_EQ(fig3.witness->to_string(), "X1⇒X⇐X2");
}

TEST(DeterministicSeparation, DegenerateNamesTheVariable) {
  try {
    is_D_separated(fixture("fig3"), "X3", "Y", {"X", "X1", "X2"});
    FAIL();
  } catch (const DegenerateQuery& e) {
    EXPECT_EQ(e.variable(), "X3");
  }
}

TEST(DeterministicSeparation, EqualsClassicWithoutDeterministicNodes) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Dag dag = detdag::testing::random_dag(rng, 6);
    NodeSet all;
    for (const auto& n : dag.nodes()) all.push_back(n.id);
    for (const auto& x : all)
      for (const auto& y : all) {
        if (x >= y) continue;
        NodeSet rest;
        for (const auto& v : all)
          if (v != x && v != y) rest.push_back(v);
        for (const auto& z : detdag::testing::subsets(rest, 3)) {
          ASSERT_EQ(is_D_separated(dag, x, y, z).separated, is_d_separated(dag, x, y, z).separated);
        }
      }
  }
}

TEST(ClassicSeparation, MatchesPathEnumerationWithActiveWitnesses) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 150; ++trial) {
    Dag dag = detdag::testing::random_det_dag(rng, {.max_nodes = 7});
    BruteSeparation brute(dag);
    for (std::size_t x = 0; x < dag.size(); ++x)
      for (std::size_t y = 0; y < dag.size(); ++y) {
        if (x == y) continue;
        NodeSet rest;
        for (std::size_t v = 0; v < dag.size(); ++v)
          if (v != x && v != y) rest.push_back(dag.node(v).id);
        for (const auto& z : detdag::testing::subsets(rest, 2)) {
          auto v = is_d_separated(dag, dag.node(x).id, dag.node(y).id, z);
          ASSERT_EQ(v.separated, brute.separated(x, y, indices(dag, z)));
          ASSERT_EQ(v.separated, is_d_separated(dag, dag.node(y).id, dag.node(x).id, z).separated);
          if (!v.separated) expect_active(dag, *v.witness, z);
        }
      }
  }
}

TEST(DeterministicSeparation, MatchesPathEnumerationOverTheClosure) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 150; ++trial) {
    Dag dag = detdag::testing::random_det_dag(rng, {.max_nodes = 7});
    BruteSeparation brute(dag);
    for (std::size_t x = 0; x < dag.size(); ++x)
      for (std::size_t y = x + 1; y < dag.size(); ++y) {
        NodeSet rest;
        for (std::size_t v = 0; v < dag.size(); ++v)
          if (v != x && v != y) rest.push_back(dag.node(v).id);
        for (const auto& z : detdag::testing::subsets(rest, 3)) {
          auto closure = brute.closure(indices(dag, z));
          auto outcome = D_separation_outcome(dag, dag.node(x).id, dag.node(y).id, z);
          if (closure.count(x) || closure.count(y)) {
            ASSERT_EQ(outcome, SeparationOutcome::Degenerate);
            continue;
          }
          bool sep = brute.separated(x, y, closure);
          ASSERT_EQ(outcome, sep ? SeparationOutcome::Separated : SeparationOutcome::Connected);
          auto v = is_D_separated(dag, dag.node(y).id, dag.node(x).id, z);
          ASSERT_EQ(v.separated, sep);
          if (!sep) expect_active(dag, *v.witness, det_closure(dag, z));
        }
      }
  }
}

TEST(Witness, LexicographicallyFirstByDeclarationOrder) {
  // two open routes A-B-D and A-C-D; B is declared before C
  Dag dag = DagBuilder("t").probabilistic("A").probabilistic("B").probabilistic("C").probabilistic("D")
                .edge("A", "C").edge("A", "B").edge("C", "D").edge("B", "D").build();
  EXPECT_EQ(is_d_separated(dag, "A", "D", {}).witness->to_string(), "A→B→D");
  EXPECT_EQ(is_d_separated(dag, "A", "D", {"B"}).witness->to_string(), "A→C→D");
}
