#include <doctest.h>

#include <random>

#include "reactordb/cost_model.hpp"

using namespace reactordb;
using cost::CostParams;
using cost::ForkJoinNode;

namespace {

CostParams uniform(int64_t cs, int64_t cr) {
  CostParams p;
  p.default_cs = cs;
  p.default_cr = cr;
  return p;
}

ForkJoinNode leaf(const std::string& r, int64_t work) {
  ForkJoinNode n;
  n.reactor = r;
  n.p_seq = work;
  return n;
}

ForkJoinNode random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int64_t> work(0, 50);
  std::uniform_int_distribution<int> fan(0, 5);
  ForkJoinNode n;
  n.reactor = "r" + std::to_string(rng() % 6);
  n.p_seq = work(rng);
  n.p_ovp = work(rng);
  if (depth > 0) {
    for (int i = fan(rng) / 2; i-- > 0;)
      n.sync_seq.push_back(random_tree(rng, depth - 1));
    for (int i = fan(rng); i-- > 0;)
      n.async_children.push_back(random_tree(rng, depth - 1));
    for (int i = fan(rng) / 3; i-- > 0;)
      n.sync_ovp.push_back(random_tree(rng, depth - 1));
  }
  return n;
}

}  // namespace

TEST_CASE("latency of a leaf is its own work") {
  CHECK(cost::estimate_latency(leaf("a", 5), uniform(10, 10)) == 5);
  CHECK(cost::simulate_forkjoin(leaf("a", 5), uniform(10, 10)) == 5);
}

TEST_CASE("sequential sync call adds full round trip") {
  ForkJoinNode n = leaf("root", 2);
  n.sync_seq.push_back(leaf("b", 3));
  CHECK(cost::estimate_latency(n, uniform(1, 2)) == 2 + (3 + 1 + 2));
}

TEST_CASE("async fan-out overlaps children and caller work") {
  ForkJoinNode n = leaf("root", 1);
  n.async_children.push_back(leaf("a", 4));
  n.async_children.push_back(leaf("b", 2));
  auto p = uniform(1, 1);
  // Sends are serialized: child i also pays all earlier sends.
  // a finishes at 1+4+1=6 after the fork, b at 1+1+2+1=5.
  CHECK(cost::estimate_latency(n, p) == 1 + 6);

  SUBCASE("caller work can hide the join entirely") {
    n.p_ovp = 10;
    CHECK(cost::estimate_latency(n, p) == 1 + 10);
  }
  SUBCASE("sync calls in the overlap section extend the caller branch") {
    n.p_ovp = 3;
    n.sync_ovp.push_back(leaf("c", 5));
    CHECK(cost::estimate_latency(n, p) == 1 + (3 + 5 + 1 + 1));
  }
}

TEST_CASE("communication is free inside a reactor or group") {
  ForkJoinNode n = leaf("root", 2);
  n.sync_seq.push_back(leaf("root", 3));
  auto p = uniform(7, 7);
  CHECK(cost::estimate_latency(n, p) == 5);

  n.sync_seq[0].reactor = "other";
  CHECK(cost::estimate_latency(n, p) == 2 + 3 + 14);
  p.group["root"] = p.group["other"] = "box1";
  CHECK(cost::estimate_latency(n, p) == 5);

  p.group.clear();
  p.cs_pair[{"root", "other"}] = 1;
  p.cr_pair[{"other", "root"}] = 2;
  CHECK(cost::estimate_latency(n, p) == 2 + 3 + 1 + 2);
}

TEST_CASE("recursion matches the event simulator on random trees") {
  std::mt19937_64 rng(20260826);
  for (int i = 0; i < 300; ++i) {
    auto t = random_tree(rng, 3);
    auto p = uniform(int64_t(rng() % 20), int64_t(rng() % 20));
    CHECK(cost::estimate_latency(t, p) == cost::simulate_forkjoin(t, p));
  }
}

TEST_CASE("latency is monotone in child work") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    auto t = random_tree(rng, 2);
    auto p = uniform(5, 5);
    int64_t base = cost::estimate_latency(t, p);
    auto grown = t;
    grown.p_seq += 100;
    CHECK(cost::estimate_latency(grown, p) >= base + 100);
    if (!t.async_children.empty()) {
      grown = t;
      grown.async_children[0].p_seq += 1;
      CHECK(cost::estimate_latency(grown, p) >= base);
    }
  }
}

TEST_CASE("calibration recovers send, reply and processing means") {
  rt::ProfiledTxn p1;
  p1.committed = true;
  rt::SubProf s1{"pay", "b", true, false, 0, 100, 400, 450};
  rt::SubProf s2{"pay", "c", true, true, 1000, 1200, 1600, 1700};
  p1.subs = {s1, s2};
  auto cal = cost::calibrate({p1});
  CHECK(cal.samples == 1);  // one profiled transaction, two sub-calls
  CHECK(cal.cs == (100 + 200) / 2);
  CHECK(cal.cr == (50 + 100) / 2);
  CHECK(cal.proc_ns["pay"] == (300 + 400) / 2);
}

TEST_CASE("breakdown buckets partition the wall clock") {
  rt::ProfiledTxn p;
  p.committed = true;
  p.t_submit = 1000;
  p.t_root_start = 1100;
  p.t_root_end = 2100;
  p.t_done = 2200;
  p.input_gen_ns = 50;
  // Sync remote call: 100ns send, 200ns processing, 100ns reply.
  p.subs.push_back({"s", "b", true, false, 1200, 1300, 1500, 1600});
  // Async call occupying [1700, 1900).
  p.subs.push_back({"a", "c", true, true, 1700, 1750, 1850, 1900});
  auto b = cost::decompose(p);
  CHECK(b.c_s_total == 100);
  CHECK(b.c_r_total == 100);
  CHECK(b.async_execution == 200);
  CHECK(b.commit_plus_inputgen == 50 + 100 + 100);
  CHECK(b.sync_execution == 1000 - 200 - 100 - 100);
  CHECK(b.total == b.sync_execution + b.c_s_total + b.c_r_total +
                       b.async_execution + b.commit_plus_inputgen);
  CHECK(b.total == (p.t_done - p.t_submit) + p.input_gen_ns);

  SUBCASE("overlapping async windows are merged, not double counted") {
    p.subs.push_back({"a2", "c", true, true, 1800, 1810, 1950, 2000});
    auto m = cost::decompose(p);
    CHECK(m.async_execution == 300);  // [1700,2000) merged
    CHECK(m.total == (p.t_done - p.t_submit) + p.input_gen_ns);
  }
}
