#include "reactordb/occ.hpp"

#include <algorithm>
#include <cassert>

namespace reactordb::occ {

ReadResult txn_read(ContainerTxnState& st, store::Table* t,
                    const std::string& key, const OpCtx& ctx) {
  std::lock_guard lk(st.mu);
  ItemKey ik{t->schema().table_name, key};

  // Read-your-writes: buffered value wins, no shared-state access.
  if (auto w = st.write_set.find(ik); w != st.write_set.end())
    return {true, w->second.value};

  auto r = st.read_set.find(ik);
  if (r == st.read_set.end()) {
    ReadEntry e{t, t->find(key), 0, true};
    std::shared_ptr<const std::string> v;
    if (e.rec) {
      auto [val, word] = e.rec->stable_read();
      v = std::move(val);
      e.version = store::tid_of(word);
      e.absent = (v == nullptr);
    }
    st.max_seen_tid = std::max(st.max_seen_tid, e.version);
    r = st.read_set.emplace(ik, e).first;
    if (st.tracer)
      st.tracer->op('r', st.txn_id, ctx.subtxn, ctx.reactor, ik.first, key);
    if (e.absent) return {};
    return {true, *v};
  }

  // Repeated read: re-read the slot; validation catches any change.
  const ReadEntry& e = r->second;
  if (!e.rec || e.absent) return {};
  auto [v, word] = e.rec->stable_read();
  if (!v) return {};
  return {true, *v};
}

void txn_write(ContainerTxnState& st, store::Table* t, const std::string& key,
               std::string value, const OpCtx& ctx) {
  std::lock_guard lk(st.mu);
  ItemKey ik{t->schema().table_name, key};
  auto [it, fresh] = st.write_set.try_emplace(ik);
  WriteEntry& e = it->second;
  e.table = t;
  e.value = std::move(value);
  if (fresh) {
    e.subtxn = ctx.subtxn;
    e.reactor = ctx.reactor;
  }
}

void txn_insert(ContainerTxnState& st, store::Table* t, const std::string& key,
                std::string value, const OpCtx& ctx) {
  std::lock_guard lk(st.mu);
  ItemKey ik{t->schema().table_name, key};
  auto [it, fresh] = st.write_set.try_emplace(ik);
  WriteEntry& e = it->second;
  e.table = t;
  e.value = std::move(value);
  e.is_insert = true;  // key-absence asserted at validation
  if (fresh) {
    e.subtxn = ctx.subtxn;
    e.reactor = ctx.reactor;
  }
}

store::ScanResult txn_scan(ContainerTxnState& st, store::Table* t,
                           const std::string& lo, const std::string& hi,
                           size_t limit, bool reverse, const OpCtx& ctx) {
  std::lock_guard lk(st.mu);
  auto out = t->scan_committed(lo, hi, limit, reverse);

  ScanRecord rec{t, t->schema().table_name, lo, hi, limit, reverse, {}};
  rec.observed.reserve(out.entries.size());
  for (const auto& e : out.entries) rec.observed.emplace_back(e.key, e.version);
  st.scan_set.push_back(std::move(rec));

  if (st.tracer)
    for (const auto& e : out.entries)
      st.tracer->op('r', st.txn_id, ctx.subtxn, ctx.reactor,
                    t->schema().table_name, e.key);

  // Overlay this txn's buffered writes in range.
  ItemKey klo{t->schema().table_name, lo}, khi{t->schema().table_name, hi};
  for (auto it = st.write_set.lower_bound(klo);
       it != st.write_set.end() && it->first <= khi; ++it) {
    const std::string& k = it->first.second;
    auto pos = std::find_if(out.entries.begin(), out.entries.end(),
                            [&](const auto& e) { return e.key == k; });
    if (pos != out.entries.end()) {
      pos->value = it->second.value;
    } else {
      out.entries.push_back({k, it->second.value, 0});
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [&](const auto& a, const auto& b) {
              return reverse ? a.key > b.key : a.key < b.key;
            });
  if (out.entries.size() > limit) {
    out.entries.resize(limit);
    out.exhausted = false;
  }
  return out;
}

namespace {

void unlock_held(ContainerTxnState& st) {
  for (auto& [ik, e] : st.write_set) {
    if (e.locked && e.rec) e.rec->unlock();
    e.locked = false;
  }
}

}  // namespace

Outcome validate_and_lock(ContainerTxnState& st) {
  std::lock_guard lk(st.mu);
  assert(st.status == TxnStatus::Active);

  auto fail = [&](const char* why) {
    st.conflict_reason = why;
    unlock_held(st);
    return Outcome::Conflict;
  };

  // Lock write-set keys in (table, key) order; the global order makes
  // concurrent validations deadlock-free.
  for (auto& [ik, e] : st.write_set) {
    e.rec = e.table->find_or_create(ik.second);
    e.rec->lock();
    e.locked = true;
    uint64_t prior = store::tid_of(e.rec->word.load(std::memory_order_acquire));
    st.max_seen_tid = std::max(st.max_seen_tid, prior);
    if (e.is_insert && e.rec->load_val())
      return fail("duplicate-key");
  }

  // Re-check read versions.
  for (const auto& [ik, e] : st.read_set) {
    store::Record* rec = e.rec ? e.rec : e.table->find(ik.second);
    if (!rec) continue;  // still no slot: absence holds
    uint64_t w = rec->word.load(std::memory_order_acquire);
    bool own = st.write_set.count(ik) > 0;
    if (store::is_locked(w) && !own) return fail("read-locked");
    bool present = rec->load_val() != nullptr;
    if (e.absent) {
      if (present) return fail("read-version");
    } else {
      if (!present || store::tid_of(w) != e.version) return fail("read-version");
    }
  }

  // Phantom protection: re-execute scan predicates, require the identical
  // committed (key, version) window.
  for (const auto& s : st.scan_set) {
    auto cur = s.table->observe(s.lo, s.hi, s.limit, s.reverse);
    if (cur.size() != s.observed.size()) return fail("scan-set");
    for (size_t i = 0; i < cur.size(); ++i) {
      if (cur[i].first != s.observed[i].first) return fail("scan-set");
      uint64_t w = cur[i].second;
      if (store::tid_of(w) != s.observed[i].second) return fail("scan-set");
      if (store::is_locked(w) &&
          !st.write_set.count({s.table_name, cur[i].first}))
        return fail("scan-set");
    }
  }

  st.status = TxnStatus::Validated;
  return Outcome::Prepared;
}

void install_and_unlock(ContainerTxnState& st, uint64_t tid) {
  std::lock_guard lk(st.mu);
  assert(st.status == TxnStatus::Validated);
  for (auto& [ik, e] : st.write_set) {
    e.rec->install(std::make_shared<const std::string>(e.value), tid);
    e.locked = false;
    if (st.tracer)
      st.tracer->op('w', st.txn_id, e.subtxn, e.reactor, ik.first, ik.second);
  }
  st.status = TxnStatus::Committed;
}

void release(ContainerTxnState& st) {
  std::lock_guard lk(st.mu);
  unlock_held(st);
  st.status = TxnStatus::Aborted;
}

uint64_t acquire_commit_tid(std::atomic<uint64_t>& last_tid, uint64_t epoch,
                            uint64_t max_seen) {
  uint64_t prev = last_tid.load(std::memory_order_relaxed);
  for (;;) {
    uint64_t tid = std::max({prev, max_seen, epoch << store::kEpochShift}) + 1;
    if (last_tid.compare_exchange_weak(prev, tid, std::memory_order_acq_rel))
      return tid;
  }
}

}  // namespace reactordb::occ
