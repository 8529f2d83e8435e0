#include <doctest.h>

#include <chrono>
#include <thread>

#include "reactordb/bench.hpp"
#include "reactordb/checker.hpp"
#include "reactordb/runtime.hpp"

using namespace reactordb;

namespace {

// One container per reactor, single executor each: every cross-reactor call
// crosses a container boundary.
plan::DeploymentPlan shard_each(const std::vector<std::string>& names, int mpl = 4) {
  plan::DeploymentPlan p;
  p.router = plan::RouterPolicy::Affinity;
  p.strategy_label = "test-sharded";
  for (int i = 0; i < (int)names.size(); ++i) {
    p.containers.push_back({i, {{0, mpl, -1}}});
    p.reactor_map.push_back({names[i], "", -1, -1, i, 0});
  }
  return p;
}

rt::ReactorType kv_type() {
  rt::ReactorType t;
  t.name = "kv";
  t.schema = [](rt::SchemaBuilder& b) { b.table("kv", 1, {"v"}); };
  t.procedures["put"] = [](rt::Txn& t, const Args& a) -> Value {
    t.write("kv", as_str(a[0]), a[1]);
    return std::monostate{};
  };
  t.procedures["get"] = [](rt::Txn& t, const Args& a) -> Value {
    return t.read("kv", as_str(a[0]));
  };
  t.procedures["self_roundtrip"] = [](rt::Txn& t, const Args& a) -> Value {
    t.call(t.reactor(), "put", {a[0], a[1]});
    return t.read("kv", as_str(a[0]));  // own write visible pre-commit
  };
  t.procedures["fanout_put"] = [](rt::Txn& t, const Args& a) -> Value {
    t.write("kv", "local", int64_t(1));
    t.call_async(as_str(a[0]), "put", {std::string("x"), int64_t(2)});
    t.call_async(as_str(a[1]), "put", {std::string("x"), int64_t(3)});
    return std::monostate{};  // children joined implicitly
  };
  t.procedures["sum_remote"] = [](rt::Txn& t, const Args& a) -> Value {
    auto f1 = t.call_async(as_str(a[0]), "get", {std::string("x")});
    auto f2 = t.call_async(as_str(a[1]), "get", {std::string("x")});
    return as_int(t.get(f1)) + as_int(t.get(f2));
  };
  t.procedures["write_then_fail"] = [](rt::Txn& t, const Args& a) -> Value {
    t.write("kv", "local", int64_t(99));
    t.call(as_str(a[0]), "deny", {});
    return std::monostate{};
  };
  t.procedures["deny"] = [](rt::Txn& t, const Args&) -> Value {
    t.abort("because");
    return std::monostate{};
  };
  t.procedures["bump"] = [](rt::Txn& t, const Args&) -> Value {
    int64_t v = as_int(t.read("kv", "x"));
    t.write("kv", "x", v + 1);
    return v + 1;
  };
  t.procedures["bump_pair"] = [](rt::Txn& t, const Args& a) -> Value {
    int64_t v = as_int(t.read("kv", "x"));
    t.write("kv", "x", v + 1);
    t.call(as_str(a[0]), "bump", {});
    return std::monostate{};
  };
  t.procedures["slow"] = [](rt::Txn&, const Args&) -> Value {
    return int64_t(bench::spin_us(7, 5000) != 0);
  };
  t.procedures["left"] = [](rt::Txn& t, const Args& a) -> Value {
    return t.call(as_str(a[0]), "slow", {});
  };
  t.procedures["right"] = [](rt::Txn&, const Args&) -> Value {
    bench::spin_us(9, 2000);
    return int64_t(1);
  };
  t.procedures["diamond"] = [](rt::Txn& t, const Args& a) -> Value {
    auto f1 = t.call_async(as_str(a[0]), "left", {a[1]});
    auto f2 = t.call_async(as_str(a[0]), "right", {});
    t.get(f1);
    return t.get(f2);
  };
  t.procedures["straight"] = [](rt::Txn& t, const Args& a) -> Value {
    t.call(as_str(a[0]), "left", {a[1]});
    return t.call(as_str(a[0]), "right", {});
  };
  return t;
}

std::vector<std::pair<std::string, std::string>> decls(
    const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::string>> d;
  for (auto& n : names) d.emplace_back(n, "kv");
  return d;
}

}  // namespace

TEST_CASE("self-call sees uncommitted writes, commit persists them") {
  std::vector<std::string> names{"a"};
  rt::Database db(decls(names), {kv_type()}, shard_each(names));
  auto r = db.run_root("a", "self_roundtrip", {std::string("k"), int64_t(42)});
  REQUIRE(r.committed);
  CHECK(as_int(r.result) == 42);
  r = db.run_root("a", "get", {std::string("k")});
  REQUIRE(r.committed);
  CHECK(as_int(r.result) == 42);
}

TEST_CASE("async fan-out commits atomically across containers") {
  std::vector<std::string> names{"a", "b", "c"};
  rt::Database db(decls(names), {kv_type()}, shard_each(names));
  auto r = db.run_root("a", "fanout_put", {std::string("b"), std::string("c")});
  REQUIRE(r.committed);
  CHECK(db.locked_records() == 0);

  r = db.run_root("a", "sum_remote", {std::string("b"), std::string("c")});
  REQUIRE(r.committed);
  CHECK(as_int(r.result) == 5);
  CHECK(as_int(db.run_root("a", "get", {std::string("local")}).result) == 1);
}

TEST_CASE("child abort unwinds the whole root") {
  std::vector<std::string> names{"a", "b"};
  rt::Database db(decls(names), {kv_type()}, shard_each(names));
  uint64_t before = db.logical_digest();
  auto r = db.run_root("a", "write_then_fail", {std::string("b")});
  CHECK(!r.committed);
  CHECK(r.abort_reason == "because");
  CHECK(db.logical_digest() == before);  // the root's write never landed
  CHECK(db.locked_records() == 0);
}

TEST_CASE("unknown reactor or procedure is rejected up front") {
  std::vector<std::string> names{"a"};
  rt::Database db(decls(names), {kv_type()}, shard_each(names));
  CHECK_THROWS_AS(db.run_root("a", "nope", {}), std::invalid_argument);
  CHECK_THROWS_AS(db.run_root("zz", "get", {}), std::invalid_argument);
}

TEST_CASE("diamond call structure is rejected, sequential variant commits") {
  std::vector<std::string> names{"a", "b", "c"};
  rt::Database db(decls(names), {kv_type()}, shard_each(names));

  // Two in-flight sub-transactions of one root on reactor b: `left` parks in
  // a slow call to c while `right` is admitted to b.
  auto r = db.run_root("a", "diamond", {std::string("b"), std::string("c")});
  CHECK(!r.committed);
  CHECK(r.abort_reason == "dangerous-structure");
  CHECK(db.locked_records() == 0);

  r = db.run_root("a", "straight", {std::string("b"), std::string("c")});
  CHECK(r.committed);
  CHECK(as_int(r.result) == 1);
}

TEST_CASE("concurrent cross-container increments stay consistent") {
  std::vector<std::string> names{"a", "b"};
  rt::Database db(decls(names), {kv_type()}, shard_each(names, 8));
  db.load_row("a", "kv", "x", int64_t(0));
  db.load_row("b", "kv", "x", int64_t(0));

  const int n = 200;
  std::vector<rt::ClientHandle> hs;
  hs.reserve(n);
  for (int i = 0; i < n; ++i)
    hs.push_back(db.submit_root("a", "bump_pair", {std::string("b")}));
  long committed = 0;
  for (auto& h : hs) committed += h.wait().committed ? 1 : 0;

  CHECK(committed >= 1);
  CHECK(db.locked_records() == 0);
  auto va = as_int(db.run_root("a", "get", {std::string("x")}).result);
  auto vb = as_int(db.run_root("b", "get", {std::string("x")}).result);
  CHECK(va == committed);  // 2PC: both writes or neither
  CHECK(vb == committed);
}

TEST_CASE("trace records committed history that checks out") {
  std::string path = "runtime_trace_test.log";
  {
    std::vector<std::string> names{"a", "b"};
    rt::Options opt;
    opt.trace_path = path;
    rt::Database db(decls(names), {kv_type()}, shard_each(names), opt);
    db.run_root("a", "put", {std::string("k"), int64_t(1)});
    db.run_root("a", "write_then_fail", {std::string("b")});  // aborts
    db.run_root("b", "put", {std::string("k"), int64_t(2)});
    db.run_root("a", "get", {std::string("k")});
  }
  auto h = chk::parse_trace_file(path);
  int commits = 0, aborts = 0;
  for (auto& op : h.ops) {
    if (op.kind == chk::TraceOp::Commit) ++commits;
    if (op.kind == chk::TraceOp::Abort) ++aborts;
  }
  CHECK(commits == 3);
  CHECK(aborts == 1);
  CHECK(chk::is_serializable(h));
  CHECK(chk::is_serializable(chk::project(h)));
  std::remove(path.c_str());
}

TEST_CASE("profiling captures the call windows") {
  std::vector<std::string> names{"a", "b", "c"};
  rt::Options opt;
  opt.profile = true;
  rt::Database db(decls(names), {kv_type()}, shard_each(names), opt);
  auto h = db.submit_root("a", "fanout_put", {std::string("b"), std::string("c")});
  REQUIRE(h.wait().committed);
  auto p = h.profile();
  CHECK(p.committed);
  REQUIRE(p.subs.size() == 2);
  for (auto& s : p.subs) {
    CHECK(s.cross_container);
    CHECK(s.is_async);
    CHECK(s.t_call <= s.t_start);
    CHECK(s.t_start <= s.t_end);
    CHECK(s.t_end <= s.t_resume);
  }
  CHECK(p.t_root_start <= p.t_root_end);
  CHECK(p.t_commit_start <= p.t_commit_end);
}

TEST_CASE("epoch advances on the configured period") {
  std::vector<std::string> names{"a"};
  rt::Options opt;
  opt.epoch_ms = 5;
  rt::Database db(decls(names), {kv_type()}, shard_each(names), opt);
  uint64_t e0 = db.epoch();
  std::this_thread::sleep_for(std::chrono::milliseconds(60));
  CHECK(db.epoch() > e0);
}

TEST_CASE("unmapped reactor is a plan error") {
  plan::DeploymentPlan p = shard_each({"a"});
  CHECK_THROWS_AS(rt::Database({{"a", "kv"}, {"ghost", "kv"}}, {kv_type()}, p),
                  plan::PlanError);
}
