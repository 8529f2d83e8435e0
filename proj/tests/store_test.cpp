#include <doctest.h>

#include "reactordb/occ.hpp"
#include "reactordb/record_store.hpp"

using namespace reactordb;

TEST_CASE("version word layout") {
  uint64_t tid = store::make_tid(3, 17);
  CHECK(tid == ((3ull << store::kEpochShift) | 17));
  CHECK(!store::is_locked(tid));
  CHECK(store::is_locked(tid | store::kLockBit));
  CHECK(store::tid_of(tid | store::kLockBit) == tid);
}

TEST_CASE("record install and stable read") {
  store::Record r;
  auto [v0, w0] = r.stable_read();
  CHECK(v0 == nullptr);
  CHECK(w0 == 0);

  CHECK(r.try_lock());
  CHECK(!r.try_lock());
  r.install(std::make_shared<const std::string>("hello"), store::make_tid(1, 1));
  auto [v1, w1] = r.stable_read();
  REQUIRE(v1 != nullptr);
  CHECK(*v1 == "hello");
  CHECK(w1 == store::make_tid(1, 1));
  CHECK(!store::is_locked(r.word.load()));
}

TEST_CASE("table find, scan, lock flags") {
  store::Table t({"acct", 1, {"bal"}});
  CHECK(t.find("a") == nullptr);
  for (const char* k : {"a", "b", "d"})
    t.find_or_create(k)->install(std::make_shared<const std::string>(k),
                                 store::make_tid(1, 1));
  t.find_or_create("c");  // absent placeholder: never committed

  auto r = t.scan_committed("a", "d", 100, false);
  REQUIRE(r.entries.size() == 3);
  CHECK(r.entries[0].key == "a");
  CHECK(r.entries[2].key == "d");
  CHECK(r.exhausted);

  r = t.scan_committed("a", "d", 2, false);
  CHECK(r.entries.size() == 2);
  CHECK(!r.exhausted);

  r = t.scan_committed("a", "d", 100, true);
  CHECK(r.entries[0].key == "d");

  CHECK(t.lock_flags_set() == 0);
  t.find("a")->lock();
  CHECK(t.lock_flags_set() == 1);
  t.find("a")->unlock();

  size_t n = 0;
  t.for_each_committed([&](const std::string&, const std::string&) { ++n; });
  CHECK(n == 3);
}

TEST_CASE("duplicate table registration rejected") {
  store::RecordStore rs;
  rs.create_table({"t", 1, {}});
  CHECK_THROWS_AS(rs.create_table({"t", 1, {}}), store::DuplicateTableError);
  CHECK(rs.get_table("t") != nullptr);
  CHECK(rs.get_table("missing") == nullptr);
}

namespace {
occ::OpCtx ctx0{0, "r0"};
}

TEST_CASE("occ read-your-writes and commit") {
  store::Table t({"t", 1, {}});
  occ::ContainerTxnState st;
  st.txn_id = 1;

  auto r = occ::txn_read(st, &t, "k", ctx0);
  CHECK(!r.found);
  occ::txn_write(st, &t, "k", "v1", ctx0);
  r = occ::txn_read(st, &t, "k", ctx0);
  CHECK(r.found);
  CHECK(r.value == "v1");

  REQUIRE(occ::validate_and_lock(st) == occ::Outcome::Prepared);
  occ::install_and_unlock(st, store::make_tid(1, 5));
  CHECK(t.lock_flags_set() == 0);
  auto [v, w] = t.find("k")->stable_read();
  REQUIRE(v);
  CHECK(*v == "v1");
  CHECK(w == store::make_tid(1, 5));
}

TEST_CASE("occ read-version conflict releases every lock") {
  store::Table t({"t", 1, {}});
  t.find_or_create("x")->install(std::make_shared<const std::string>("0"),
                                 store::make_tid(1, 1));

  occ::ContainerTxnState a;
  a.txn_id = 1;
  occ::txn_read(a, &t, "x", ctx0);
  occ::txn_write(a, &t, "x", "a", ctx0);
  occ::txn_write(a, &t, "y", "a", ctx0);

  // A second transaction overwrites x before a validates.
  occ::ContainerTxnState b;
  b.txn_id = 2;
  occ::txn_write(b, &t, "x", "b", ctx0);
  REQUIRE(occ::validate_and_lock(b) == occ::Outcome::Prepared);
  occ::install_and_unlock(b, store::make_tid(1, 2));

  CHECK(occ::validate_and_lock(a) == occ::Outcome::Conflict);
  CHECK(a.conflict_reason == std::string("read-version"));
  CHECK(t.lock_flags_set() == 0);
  occ::release(a);
  CHECK(*t.find("x")->stable_read().first == "b");
}

TEST_CASE("occ absent read stays valid only while key stays absent") {
  store::Table t({"t", 1, {}});
  occ::ContainerTxnState a;
  a.txn_id = 1;
  CHECK(!occ::txn_read(a, &t, "ghost", ctx0).found);
  occ::txn_write(a, &t, "out", "1", ctx0);

  occ::ContainerTxnState b;
  b.txn_id = 2;
  occ::txn_insert(b, &t, "ghost", "boo", ctx0);
  REQUIRE(occ::validate_and_lock(b) == occ::Outcome::Prepared);
  occ::install_and_unlock(b, store::make_tid(1, 2));

  CHECK(occ::validate_and_lock(a) == occ::Outcome::Conflict);
  CHECK(t.lock_flags_set() == 0);
}

TEST_CASE("occ duplicate insert conflicts") {
  store::Table t({"t", 1, {}});
  t.find_or_create("k")->install(std::make_shared<const std::string>("v"),
                                 store::make_tid(1, 1));
  occ::ContainerTxnState st;
  st.txn_id = 1;
  occ::txn_insert(st, &t, "k", "again", ctx0);
  CHECK(occ::validate_and_lock(st) == occ::Outcome::Conflict);
  CHECK(st.conflict_reason == std::string("duplicate-key"));
  CHECK(t.lock_flags_set() == 0);
}

TEST_CASE("occ phantom: scan window revalidated") {
  store::Table t({"t", 1, {}});
  t.find_or_create("a")->install(std::make_shared<const std::string>("1"),
                                 store::make_tid(1, 1));
  t.find_or_create("c")->install(std::make_shared<const std::string>("3"),
                                 store::make_tid(1, 1));

  occ::ContainerTxnState a;
  a.txn_id = 1;
  auto sr = occ::txn_scan(a, &t, "a", "c", 100, false, ctx0);
  CHECK(sr.entries.size() == 2);
  occ::txn_write(a, &t, "sum", "4", ctx0);

  occ::ContainerTxnState b;
  b.txn_id = 2;
  occ::txn_insert(b, &t, "b", "2", ctx0);
  REQUIRE(occ::validate_and_lock(b) == occ::Outcome::Prepared);
  occ::install_and_unlock(b, store::make_tid(1, 2));

  CHECK(occ::validate_and_lock(a) == occ::Outcome::Conflict);
  CHECK(a.conflict_reason == std::string("scan-set"));
  CHECK(t.lock_flags_set() == 0);
}

TEST_CASE("occ scan overlays buffered writes") {
  store::Table t({"t", 1, {}});
  t.find_or_create("a")->install(std::make_shared<const std::string>("old"),
                                 store::make_tid(1, 1));
  occ::ContainerTxnState st;
  st.txn_id = 1;
  occ::txn_write(st, &t, "a", "new", ctx0);
  occ::txn_write(st, &t, "b", "mine", ctx0);
  auto sr = occ::txn_scan(st, &t, "a", "z", 100, false, ctx0);
  REQUIRE(sr.entries.size() == 2);
  CHECK(sr.entries[0].value == "new");
  CHECK(sr.entries[1].value == "mine");
}

TEST_CASE("commit tid exceeds observations and carries the epoch") {
  std::atomic<uint64_t> last{store::make_tid(2, 9)};
  uint64_t t1 = occ::acquire_commit_tid(last, 2, store::make_tid(2, 40));
  CHECK(t1 > store::make_tid(2, 40));
  CHECK((t1 >> store::kEpochShift) == 2);
  uint64_t t2 = occ::acquire_commit_tid(last, 3, 0);
  CHECK(t2 > t1);
  CHECK((t2 >> store::kEpochShift) == 3);
}
