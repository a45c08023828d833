#include <gtest/gtest.h>

#include <random>

#include "detdag/classify.hpp"
#include "detdag/reduce.hpp"
#include "support/fixtures.hpp"
#include "support/random_dag.hpp"

using namespace detdag;
using detdag::testing::fixture;

namespace {

Dag fig3d() { return DagBuilder(fixture("fig3")).define("Z1", FunctionalForm::ratio("X1", "X")).build(); }

std::vector<std::string_view> codes(const std::vector<Warning>& ws) {
  std::vector<std::string_view> out;
  for (const auto& w : ws) out.push_back(warning_code(w.code));
  return out;
}

bool has(const std::vector<Warning>& ws, WarningCode code) {
  return std::any_of(ws.begin(), ws.end(), [&](const Warning& w) { return w.code == code; });
}

using Pair = std::pair<NodeId, NodeId>;

std::vector<Pair> pairs(const std::vector<TautologyFinding>& fs) {
  std::vector<Pair> out;
  for (const auto& f : fs) out.push_back(f.pair);
  return out;
}

}  // namespace

TEST(Tautologies, SharedDenominator) {
  auto fs = detect_tautologies(fixture("fig2a"));
  // every pair touching a ratio, and nothing among the probabilistic nodes
  EXPECT_EQ(pairs(fs), (std::vector<Pair>{{"X", "Z1"}, {"Y", "Z2"}, {"N", "Z1"}, {"N", "Z2"}, {"Z1", "Z2"}}));
  const auto& z = fs.back();
  EXPECT_EQ(z.relation, TautologyRelation::SharedParent);
  EXPECT_EQ(z.shared_base, NodeSet{"N"});
  EXPECT_FALSE(z.explanation.empty());
}

TEST(Tautologies, ChangeScoreAndBaseline) {
  auto fs = detect_tautologies(fixture("fig2b"));
  ASSERT_EQ(pairs(fs), (std::vector<Pair>{{"X0", "X"}, {"X1", "X"}}));
  EXPECT_EQ(fs[0].relation, TautologyRelation::SelfOrPart);
  EXPECT_EQ(fs[0].shared_base, NodeSet{"X0"});
}

TEST(Tautologies, AggregateSiblings) {
  auto fs = detect_tautologies(fixture("fig2c"));
  auto it = std::find_if(fs.begin(), fs.end(), [](const auto& f) { return f.pair == Pair{"X1_j", "X_j"}; });
  ASSERT_NE(it, fs.end());
  EXPECT_EQ(it->shared_base, (NodeSet{"X1_i", "N_j"}));
  EXPECT_EQ(it->relation, TautologyRelation::SharedParent);
  EXPECT_EQ(fs.size(), 8u);
}

TEST(Tautologies, InvariantsOnRandomGraphs) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Dag dag = detdag::testing::random_det_dag(rng);
    for (const auto& f : detect_tautologies(dag)) {
      EXPECT_FALSE(f.shared_base.empty());
      EXPECT_TRUE(dag.node(f.pair.first).deterministic() || dag.node(f.pair.second).deterministic());
      EXPECT_LT(dag.index_of(f.pair.first), dag.index_of(f.pair.second));
    }
  }
}

TEST(Estimand, Fig3Table) {
  Dag dag = fixture("fig3");
  auto total = classify_estimand(dag, "X1", "Y", {});
  EXPECT_EQ(total.kind, EstimandKind::TotalEffect);
  EXPECT_EQ(total.whole, std::optional<NodeId>("X"));

  auto rel = classify_estimand(dag, "X1", "Y", {"X"});
  EXPECT_EQ(rel.kind, EstimandKind::RelativeEffect);
  EXPECT_EQ(rel.substituting, (NodeSet{"X2", "X3"}));

  auto rel3 = classify_estimand(dag, "X1", "Y", {"X", "X2"});
  EXPECT_EQ(rel3.kind, EstimandKind::RelativeEffect);
  EXPECT_EQ(rel3.substituting, NodeSet{"X3"});

  auto ratio = classify_estimand(fig3d(), "Z1", "Y", {});
  EXPECT_EQ(ratio.kind, EstimandKind::ConflatedRatioEffect);
  EXPECT_EQ(ratio.numerator_base, NodeSet{"X1"});
  EXPECT_EQ(ratio.denominator_base, (NodeSet{"X1", "X2", "X3"}));
  EXPECT_TRUE(has(ratio.warnings, WarningCode::RatioConflation));
  EXPECT_FALSE(has(ratio.warnings, WarningCode::Tautology));
}

TEST(Estimand, WholeConditionedThroughItsParts) {
  // {X2, X3} with X1 as exposure does not determine X; {X} via closure does
  auto r = classify_estimand(fixture("fig3"), "X1", "Y", {"X2", "X3"});
  EXPECT_EQ(r.kind, EstimandKind::TotalEffect);
}

TEST(Estimand, Degenerate) {
  EXPECT_THROW(classify_estimand(fixture("fig3"), "X3", "Y", {"X", "X1", "X2"}), DegenerateQuery);
  EXPECT_THROW(classify_estimand(fixture("fig1a"), "M", "Y", {"B"}), DegenerateQuery);
  EXPECT_THROW(classify_estimand(fixture("fig3"), "X1", "X1", {}), QueryError);
  EXPECT_THROW(classify_estimand(fixture("fig3"), "X1", "Y", {"X1"}), QueryError);
}

TEST(Estimand, CompositeSummary) {
  auto r = classify_estimand(fixture("fig4a"), "BMI", "CVD", {});
  EXPECT_EQ(r.kind, EstimandKind::CompositeSummaryEffect);
  EXPECT_EQ(codes(r.warnings),
            (std::vector<std::string_view>{"RATIO_CONFLATION", "CONSISTENCY_RISK", "VARIANCE_DOMINANCE"}));
  EXPECT_TRUE(r.identifiable);
  EXPECT_EQ(r.backdoor_sets, std::vector<NodeSet>{{}});
}

TEST(Estimand, FixedWholeAllowsOnlyRelativeEffects) {
  DagBuilder b("day");
  b.probabilistic("sleep").probabilistic("sedentary").probabilistic("active").probabilistic("Y");
  b.define("day", FunctionalForm::sum({"sleep", "sedentary", "active"}));
  b.find("day")->fixed = true;
  b.edge("sleep", "Y").edge("active", "Y");
  auto r = classify_estimand(b.build(), "active", "Y", {});
  EXPECT_EQ(r.kind, EstimandKind::RelativeEffect);
  EXPECT_EQ(r.substituting, (NodeSet{"sleep", "sedentary"}));
  EXPECT_TRUE(has(r.warnings, WarningCode::FixedWhole));
}

TEST(Estimand, AggregatedAdjustmentAndPositivity) {
  DagBuilder b("diet");
  NodeSet parts;
  for (int i = 1; i <= 6; ++i) {
    parts.push_back("P" + std::to_string(i));
    b.probabilistic(parts.back());
  }
  b.probabilistic("Y");
  b.define("E", FunctionalForm::sum(parts));
  b.define("R", FunctionalForm::sum({"P2", "P3", "P4", "P5", "P6"}));
  for (const auto& p : parts) b.edge(p, "Y");
  auto r = classify_estimand(b.build(), "P1", "Y", {"R"});
  EXPECT_EQ(r.kind, EstimandKind::TotalEffect);
  EXPECT_TRUE(has(r.warnings, WarningCode::AggregatedParts));
  EXPECT_TRUE(has(r.warnings, WarningCode::Positivity));
}

TEST(Estimand, EmptyAdjustmentNeverRelativeAndShrinkingSubstitution) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 150; ++trial) {
    Dag dag = detdag::testing::random_det_dag(rng, {.max_nodes = 7});
    for (const auto& x : dag.nodes()) {
      for (const auto& y : dag.nodes()) {
        if (x.id == y.id) continue;
        auto base = classify_estimand(dag, x.id, y.id, {}, {.max_backdoor_size = 1});
        EXPECT_NE(base.kind, EstimandKind::RelativeEffect);
        for (const auto& s : base.backdoor_sets) {
          EXPECT_TRUE(is_D_separated(prune_outgoing(dag, x.id), x.id, y.id, s).separated);
        }
      }
    }
  }
  // adding parts to the adjustment set only removes substitutes
  Dag dag = fixture("fig3");
  NodeSet prev = classify_estimand(dag, "X1", "Y", {"X"}).substituting;
  NodeSet next = classify_estimand(dag, "X1", "Y", {"X", "X3"}).substituting;
  EXPECT_TRUE(std::includes(prev.begin(), prev.end(), next.begin(), next.end()));
  EXPECT_LT(next.size(), prev.size());
}

TEST(Estimand, AdjustmentDiagnostics) {
  auto bad = classify_estimand(fixture("fig5b"), "X", "Y", {});
  EXPECT_FALSE(bad.adjustment_valid);
  ASSERT_TRUE(bad.open_backdoor);
  EXPECT_EQ(bad.open_backdoor->steps.front().node, "X");
  auto good = classify_estimand(fixture("fig5b"), "X", "Y", {"C"});
  EXPECT_TRUE(good.adjustment_valid);
  EXPECT_FALSE(good.open_backdoor);
}

TEST(Backdoor, Examples) {
  EXPECT_EQ(enumerate_backdoor_sets(fixture("fig5b"), "X", "Y", 3), std::vector<NodeSet>{{"C"}});
  EXPECT_TRUE(enumerate_backdoor_sets(fixture("fig5d"), "X", "Y", 3).empty());
  EXPECT_TRUE(enumerate_backdoor_sets(fixture("fig5d"), "X", "Y", 10).empty());
  Dag reduced = reduce_all(fixture("fig2a"), {"X", "Y", "N"});
  EXPECT_EQ(enumerate_backdoor_sets(reduced, "X", "Y", 3), std::vector<NodeSet>{{"N"}});
  Dag direct = DagBuilder("t").probabilistic("A").probabilistic("Y").edge("A", "Y").build();
  EXPECT_EQ(enumerate_backdoor_sets(direct, "A", "Y", 3), std::vector<NodeSet>{{}});
}

TEST(Backdoor, MinimalAndValid) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    Dag dag = detdag::testing::random_dag(rng, 6, 0.5);
    for (std::size_t x = 0; x < dag.size(); ++x)
      for (std::size_t y = x + 1; y < dag.size(); ++y) {
        auto sets = enumerate_backdoor_sets(dag, dag.node(x).id, dag.node(y).id, 3);
        for (const auto& s : sets) {
          EXPECT_TRUE(is_D_separated(prune_outgoing(dag, dag.node(x).id), dag.node(x).id, dag.node(y).id, s).separated);
          for (const auto& t : sets)
            if (&s != &t) EXPECT_FALSE(std::includes(s.begin(), s.end(), t.begin(), t.end()) && t.size() < s.size());
        }
      }
  }
}

TEST(Confounder, Fig5Roles) {
  auto b = classify_confounder(fixture("fig5b"), "X", "Y", "C");
  EXPECT_EQ(b.role, ConfounderKind::UncomplicatedConfounder);
  EXPECT_TRUE(b.identifiable);
  EXPECT_TRUE(has(b.warnings, WarningCode::HomogeneityAssumed));

  auto c = classify_confounder(fixture("fig5c"), "X", "Y", "C");
  EXPECT_EQ(c.role, ConfounderKind::InconsistentConfounder);
  EXPECT_TRUE(c.identifiable);

  auto d = classify_confounder(fixture("fig5d"), "X", "Y", "C");
  EXPECT_EQ(d.role, ConfounderKind::ConfounderMediatorConflict);
  EXPECT_FALSE(d.identifiable);
  using Rel = std::pair<NodeId, ParentRelation>;
  EXPECT_EQ(d.per_parent, (std::vector<Rel>{{"X1", ParentRelation::Mediator}, {"X2", ParentRelation::Confounder}}));
}

TEST(Confounder, PartialAndAbsent) {
  // C reaches only one of the two parts
  Dag dag = DagBuilder("t").probabilistic("C").probabilistic("A").probabilistic("B").probabilistic("Y")
                .define("S", FunctionalForm::sum({"A", "B"})).edge("C", "A").edge("C", "Y").edge("S", "Y").build();
  EXPECT_EQ(classify_confounder(dag, "S", "Y", "C").role, ConfounderKind::InconsistentConfounder);
  Dag none = DagBuilder("t").probabilistic("C").probabilistic("A").probabilistic("Y").edge("A", "Y").edge("C", "Y").build();
  EXPECT_EQ(classify_confounder(none, "A", "Y", "C").role, ConfounderKind::NotAConfounder);
  EXPECT_THROW(classify_confounder(none, "A", "Y", "A"), QueryError);
  EXPECT_THROW(classify_confounder(none, "A", "Y", "Q"), UnknownNode);
}

TEST(Confounder, ConflictIffMixedIffUnidentifiable) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    Dag dag = detdag::testing::random_det_dag(rng, {.max_nodes = 7});
    for (const auto& x : dag.nodes())
      for (const auto& y : dag.nodes())
        for (const auto& c : dag.nodes()) {
          if (x.id == y.id || c.id == x.id || c.id == y.id) continue;
          auto r = classify_confounder(dag, x.id, y.id, c.id);
          bool conf = false, med = false;
          for (const auto& [p, rel] : r.per_parent) {
            conf |= rel == ParentRelation::Confounder;
            med |= rel == ParentRelation::Mediator;
          }
          EXPECT_EQ(r.role == ConfounderKind::ConfounderMediatorConflict, conf && med);
          EXPECT_EQ(r.identifiable, !(conf && med));
          EXPECT_EQ(r.role == ConfounderKind::NotAConfounder, !conf);
        }
  }
}

TEST(Consistency, Reports) {
  auto bmi = consistency_report(fixture("fig4a"), "BMI");
  EXPECT_EQ(codes(bmi), (std::vector<std::string_view>{"CONSISTENCY_RISK", "VARIANCE_DOMINANCE"}));
  EXPECT_NE(bmi[1].text.find("height="), std::string::npos);
  EXPECT_EQ(codes(consistency_report(fixture("fig3"), "X")), std::vector<std::string_view>{"CONSISTENCY_RISK"});
  EXPECT_TRUE(consistency_report(fixture("fig3"), "Y").empty());
  EXPECT_TRUE(consistency_report(fixture("fig1a"), "M").empty());
  EXPECT_EQ(codes(consistency_report(fixture("fig5b"), "X")),
            (std::vector<std::string_view>{"CONSISTENCY_RISK", "VARIANCE_DOMINANCE", "TEMPORAL_SPREAD"}));
}
