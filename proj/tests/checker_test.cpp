#include <doctest.h>

#include <sstream>

#include "reactordb/checker.hpp"

using namespace reactordb;
using chk::History;
using chk::TraceOp;

namespace {

TraceOp rd(uint64_t seq, uint64_t txn, const std::string& reactor,
           const std::string& item, uint64_t sub = 0) {
  return {TraceOp::Read, seq, txn, sub, reactor, item};
}
TraceOp wr(uint64_t seq, uint64_t txn, const std::string& reactor,
           const std::string& item, uint64_t sub = 0) {
  return {TraceOp::Write, seq, txn, sub, reactor, item};
}
TraceOp commit(uint64_t seq, uint64_t txn) {
  return {TraceOp::Commit, seq, txn, 0, "", ""};
}
TraceOp abort(uint64_t seq, uint64_t txn) {
  return {TraceOp::Abort, seq, txn, 0, "", ""};
}

}  // namespace

TEST_CASE("trace parsing") {
  std::istringstream in(
      "1 10 0 alpha acct 6b31 r\n"
      "2 10 1 beta acct 6b32 w\n"
      "3 10 c\n"
      "4 11 a\n");
  auto h = chk::parse_trace(in);
  REQUIRE(h.ops.size() == 4);
  CHECK(h.ops[0].kind == TraceOp::Read);
  CHECK(h.ops[0].txn == 10);
  CHECK(h.ops[0].reactor == "alpha");
  CHECK(h.ops[0].item == std::string("acct") + '\0' + "k1");
  CHECK(h.ops[1].kind == TraceOp::Write);
  CHECK(h.ops[1].subtxn == 1);
  CHECK(h.ops[2].kind == TraceOp::Commit);
  CHECK(h.ops[3].kind == TraceOp::Abort);

  std::istringstream bad("2 1 c\n1 1 c\n");
  CHECK_THROWS_WITH(chk::parse_trace(bad), "trace sequence not increasing");
  std::istringstream junk("1 1 z\n");
  CHECK_THROWS(chk::parse_trace(junk));
}

TEST_CASE("projection renames items per reactor and flattens sub-transactions") {
  History h;
  h.ops = {wr(1, 1, "r1", "x", 3), wr(2, 2, "r2", "x", 1), commit(3, 1),
           commit(4, 2)};
  auto p = chk::project(h);
  CHECK(p.model == chk::Model::Classic);
  REQUIRE(p.ops.size() == 4);
  CHECK(p.ops[0].item != p.ops[1].item);  // same name, different reactors
  CHECK(p.ops[0].subtxn == 0);

  // No conflict after renaming: both serial orders work.
  auto sg = chk::build_sg(p);
  CHECK(sg.nodes.size() == 2);
  CHECK(sg.edges.empty());
  CHECK(chk::is_serializable(p));
}

TEST_CASE("classic write skew cycle is caught") {
  History h;
  h.model = chk::Model::Classic;
  // T1 reads x then overwrites it after T2's committed write: T1->T2 (rw)
  // and T2->T1 (ww) close a cycle.
  h.ops = {rd(1, 1, "r", "x"), wr(2, 2, "r", "x"), commit(3, 2),
           wr(4, 1, "r", "x"), commit(5, 1)};
  auto sg = chk::build_sg(h);
  CHECK(sg.nodes.size() == 2);
  CHECK(sg.edges.size() == 2);
  CHECK(!sg.acyclic());
  CHECK(!chk::is_serializable(h));
  CHECK(!chk::brute_force_serializable(h));
}

TEST_CASE("aborted transactions are invisible to the graph") {
  History h;
  h.model = chk::Model::Classic;
  h.ops = {rd(1, 1, "r", "x"), wr(2, 2, "r", "x"), abort(3, 2),
           wr(4, 1, "r", "x"), commit(5, 1)};
  auto sg = chk::build_sg(h);
  CHECK(sg.nodes.size() == 1);
  CHECK(chk::is_serializable(h));
}

TEST_CASE("edge witnesses name the conflicting item") {
  History h;
  h.model = chk::Model::Classic;
  h.ops = {wr(1, 1, "r", "a"), rd(2, 2, "r", "a"), commit(3, 1), commit(4, 2)};
  auto sg = chk::build_sg(h);
  REQUIRE(sg.edges.size() == 1);
  CHECK(sg.edges[0].from == 1);
  CHECK(sg.edges[0].to == 2);
  CHECK(sg.edges[0].witness == "a");
  CHECK(sg.acyclic());
}

TEST_CASE("brute force bails out past six committed transactions") {
  History h;
  h.model = chk::Model::Classic;
  uint64_t seq = 1;
  for (uint64_t t = 1; t <= 7; ++t) {
    h.ops.push_back(wr(seq++, t, "r", "k" + std::to_string(t)));
    h.ops.push_back(commit(seq++, t));
  }
  CHECK_THROWS_AS((void)chk::brute_force_serializable(h), std::length_error);
}

TEST_CASE("graph test agrees with exhaustive search on random histories") {
  std::mt19937_64 rng(4242);
  int nonserializable = 0;
  for (int i = 0; i < 400; ++i) {
    auto h = chk::random_history(rng);
    auto p = chk::project(h);
    bool fast = chk::is_serializable(p);
    bool slow = chk::brute_force_serializable(p);
    CHECK(fast == slow);
    nonserializable += !fast;
  }
  // The generator interleaves aggressively enough to exercise both answers.
  CHECK(nonserializable > 0);
  CHECK(nonserializable < 400);
}

TEST_CASE("serializability is invariant under projection") {
  auto rep = chk::projection_suite(7, 250);
  CHECK(rep.cases == 250);
  CHECK(rep.violations.empty());
  CHECK(rep.oracle_mismatch.empty());
  CHECK(rep.serializable > 0);

  auto again = chk::projection_suite(7, 250);
  CHECK(again.serializable == rep.serializable);
}
