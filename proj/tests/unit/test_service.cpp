#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "detdag/service.hpp"
#include "support/fixtures.hpp"

using namespace detdag;

namespace {

std::string source(const std::string& name) {
  std::ifstream in(detdag::testing::fixture_path(name));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ApiResponse post(const std::string& path, const json& body) { return handle_request("POST", path, body.dump()); }

}  // namespace

TEST(Service, DsepWitness) {
  auto r = post("/api/dsep", {{"source", source("fig3")}, {"x", "X1"}, {"y", "X2"}, {"given", {"X"}}});
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(r.body["ok"]);
  const auto& res = r.body["result"];
  EXPECT_FALSE(res["separated"]);
  EXPECT_EQ(res["witness"]["text"], "X1⇒X⇐X2");
  EXPECT_EQ(res["witness"]["steps"].size(), 3u);
  EXPECT_EQ(res["witness"]["steps"][1]["role"], "collider");
}

TEST(Service, DsepDegenerateIsAVerdict) {
  auto r = post("/api/dsep", {{"source", source("fig1a")}, {"x", "M"}, {"y", "Y"}, {"given", {"B"}}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["result"]["outcome"], "degenerate");
  EXPECT_EQ(r.body["result"]["variable"], "M");
  auto classic = post("/api/dsep", {{"source", source("fig1a")}, {"x", "M"}, {"y", "Y"}, {"given", {"B"}}, {"classic", true}});
  EXPECT_EQ(classic.body["result"]["outcome"], "separated");
}

TEST(Service, ParseErrors) {
  auto r = post("/api/parse", {{"source", "dag t {"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_FALSE(r.body["ok"]);
  ASSERT_EQ(r.body["errors"].size(), 1u);
  EXPECT_EQ(r.body["errors"][0]["line"], 1);
  EXPECT_TRUE(r.body["errors"][0].contains("column"));

  auto sem = post("/api/parse", {{"source", "dag t { X := sum(A,B) }"}});
  EXPECT_EQ(sem.status, 422);
  EXPECT_EQ(sem.body["errors"].size(), 2u);
}

TEST(Service, ParseResult) {
  auto r = post("/api/parse", {{"source", source("fig3")}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["result"]["dag"]["nodes"].size(), 5u);
  EXPECT_EQ(r.body["result"]["dag"]["nodes"][3]["form"]["kind"], "sum");
  EXPECT_EQ(r.body["result"]["canonical"], serialize(detdag::testing::fixture("fig3")));
}

TEST(Service, Classify) {
  std::string fig3d = source("fig3");
  fig3d.insert(fig3d.rfind('}'), "  Z1 := ratio(X1, X)\n");
  auto r = post("/api/classify", {{"source", fig3d}, {"exposure", "Z1"}, {"outcome", "Y"}, {"adjust", json::array()}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["result"]["kind"], "ConflatedRatioEffect");
  EXPECT_EQ(r.body["result"]["warnings"][0]["code"], "RATIO_CONFLATION");

  auto rel = post("/api/classify", {{"source", source("fig3")}, {"exposure", "X1"}, {"outcome", "Y"}, {"adjust", {"X"}}});
  EXPECT_EQ(rel.body["result"]["kind"], "RelativeEffect");
  EXPECT_EQ(rel.body["result"]["substituting"], json({"X2", "X3"}));

  auto deg = post("/api/classify", {{"source", source("fig1a")}, {"exposure", "M"}, {"outcome", "Y"}, {"adjust", {"B"}}});
  EXPECT_EQ(deg.status, 422);
  EXPECT_EQ(deg.body["errors"][0]["kind"], "degenerate_query");
}

TEST(Service, ConfounderTautologiesRender) {
  auto c = post("/api/confounder", {{"source", source("fig5d")}, {"exposure", "X"}, {"outcome", "Y"}, {"candidate", "C"}});
  ASSERT_EQ(c.status, 200);
  EXPECT_EQ(c.body["result"]["role"], "ConfounderMediatorConflict");
  EXPECT_FALSE(c.body["result"]["identifiable"]);

  auto t = post("/api/tautologies", {{"source", source("fig2a")}});
  ASSERT_EQ(t.status, 200);
  EXPECT_EQ(t.body["result"].back()["pair"], json({"Z1", "Z2"}));
  EXPECT_EQ(t.body["result"].back()["shared_base"], json({"N"}));

  auto d = post("/api/render", {{"source", source("fig3")}, {"highlight", {"X"}}});
  ASSERT_EQ(d.status, 200);
  EXPECT_NE(d.body["result"]["dot"].get<std::string>().find("fillcolor"), std::string::npos);
}

TEST(Service, SimulateSummariesOnly) {
  auto r = post("/api/simulate", {{"source", source("fig3")}, {"n", 20000}, {"seed", 3}});
  ASSERT_EQ(r.status, 200);
  const auto& res = r.body["result"];
  EXPECT_EQ(res["names"].size(), 5u);
  EXPECT_EQ(res["correlation"].size(), 5u);
  EXPECT_DOUBLE_EQ(res["correlation"][0][0].get<double>(), 1.0);
  EXPECT_FALSE(res.contains("rows"));
  EXPECT_EQ(post("/api/simulate", {{"source", source("fig3")}, {"n", 100001}}).status, 422);
  EXPECT_EQ(post("/api/simulate", {{"source", source("fig3")}, {"n", -1}}).status, 400);
}

TEST(Service, RequestErrors) {
  EXPECT_EQ(handle_request("POST", "/api/nope", "{}").status, 404);
  EXPECT_EQ(handle_request("GET", "/api/parse", "{}").status, 405);
  EXPECT_EQ(handle_request("POST", "/api/parse", "not json").status, 400);
  EXPECT_EQ(handle_request("POST", "/api/parse", "{}").status, 400);
  std::string big(kMaxRequestBytes + 1, ' ');
  auto r = handle_request("POST", "/api/parse", big);
  EXPECT_EQ(r.status, 413);
  EXPECT_FALSE(r.body["ok"]);
  auto unknown = post("/api/dsep", {{"source", source("fig3")}, {"x", "Q"}, {"y", "X2"}});
  EXPECT_EQ(unknown.status, 422);
  EXPECT_EQ(unknown.body["errors"][0]["kind"], "unknown_node");
  auto same = post("/api/dsep", {{"source", source("fig3")}, {"x", "X1"}, {"y", "X1"}});
  EXPECT_EQ(same.status, 422);
}

TEST(Service, StatelessAcrossOrder) {
  json a = {{"source", source("fig3")}, {"x", "X1"}, {"y", "X2"}, {"given", {"X"}}};
  json b = {{"source", source("fig5b")}, {"exposure", "X"}, {"outcome", "Y"}, {"adjust", json::array()}};
  auto a1 = post("/api/dsep", a).body.dump();
  auto b1 = post("/api/classify", b).body.dump();
  auto b2 = post("/api/classify", b).body.dump();
  auto a2 = post("/api/dsep", a).body.dump();
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(b1, b2);
}
