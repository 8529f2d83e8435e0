#include <doctest.h>

#include "reactordb/deployment.hpp"

using namespace reactordb;

namespace {
std::vector<std::string> names(const std::string& prefix, int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}
}  // namespace

TEST_CASE("plan json round-trip") {
  const char* text = R"({
    "strategy_label": "custom",
    "router": "affinity",
    "containers": [
      {"id": 0, "executors": [{"id": 0, "mpl": 2}, {"id": 1, "mpl": 1, "core": 3}]},
      {"id": 1, "executors": [{"id": 0, "mpl": 4}]}
    ],
    "reactor_map": [
      {"prefix": "w", "begin": 0, "end": 9, "container": 0, "executor": 1},
      {"reactor": "hub", "container": 1}
    ]
  })";
  auto p = plan::parse_plan(text);
  CHECK(p.router == plan::RouterPolicy::Affinity);
  CHECK(p.containers.size() == 2);
  CHECK(p.containers[0].executors[1].core == 3);

  auto back = plan::parse_plan(p.serialize());
  CHECK(back == p);

  auto hit = p.lookup("w4");
  REQUIRE(hit.has_value());
  CHECK(hit->first == 0);
  CHECK(hit->second == 1);
  hit = p.lookup("hub");
  REQUIRE(hit.has_value());
  CHECK(hit->first == 1);
  CHECK(hit->second == -1);
  CHECK(!p.lookup("w10").has_value());
  CHECK(!p.lookup("nobody").has_value());
}

TEST_CASE("plan validation errors") {
  auto kind_of = [](const std::string& text) {
    try {
      plan::parse_plan(text);
    } catch (const plan::PlanError& e) {
      return e.kind;
    }
    return std::string("no-error");
  };

  CHECK(kind_of(R"({"bogus": 1})") == "schema-error");
  CHECK(kind_of(R"({"containers": []})") == "schema-error");
  CHECK(kind_of(R"({"containers": [{"id":0,"executors":[{"id":0,"mpl":0}]}]})") ==
        "schema-error");
  CHECK(kind_of(R"({"containers": [{"id":0,"executors":[{"id":0},{"id":0}]}]})") ==
        "schema-error");
  // A reactor mapped twice.
  CHECK(kind_of(R"({
    "containers": [{"id":0,"executors":[{"id":0}]}],
    "reactor_map": [
      {"prefix":"a","begin":0,"end":5,"container":0},
      {"reactor":"a3","container":0}
    ]})") == "double-mapping");
  // Affinity hint pointing at a nonexistent executor.
  CHECK(kind_of(R"({
    "containers": [{"id":0,"executors":[{"id":0}]}],
    "reactor_map": [{"reactor":"a","container":0,"executor":7}]})") ==
        "dangling-executor");
  CHECK(kind_of(R"({
    "containers": [{"id":0,"executors":[{"id":0}]}],
    "reactor_map": [{"reactor":"a","container":2}]})") == "schema-error");
}

TEST_CASE("strategy shapes") {
  auto rs = names("w", 8);

  auto s1 = plan::build_strategy(plan::Strategy::S1, 4, rs);
  CHECK(s1.containers.size() == 1);
  CHECK(s1.containers[0].executors.size() == 4);
  CHECK(s1.router == plan::RouterPolicy::RoundRobin);
  CHECK(s1.lookup("w7")->first == 0);

  auto s2 = plan::build_strategy(plan::Strategy::S2, 4, rs);
  CHECK(s2.containers.size() == 1);
  CHECK(s2.router == plan::RouterPolicy::Affinity);
  // Contiguous two-reactor chunks: w2 belongs to executor 1, w7 to executor 3.
  CHECK(s2.lookup("w2")->second == 1);
  CHECK(s2.lookup("w7")->second == 3);

  auto s3 = plan::build_strategy(plan::Strategy::S3, 4, rs);
  CHECK(s3.containers.size() == 4);
  for (auto& c : s3.containers) CHECK(c.executors.size() == 1);
  CHECK(s3.lookup("w0")->first == 0);
  CHECK(s3.lookup("w7")->first == 3);

  // One executor per reactor: reactor i lands on executor i.
  auto s2n = plan::build_strategy(plan::Strategy::S2, 8, rs);
  for (int i = 0; i < 8; ++i)
    CHECK(s2n.lookup("w" + std::to_string(i))->second == i);

  // Round-trip through json too.
  CHECK(plan::parse_plan(s3.serialize()) == s3);
}
