#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "reactordb/record_store.hpp"
#include "reactordb/trace.hpp"

namespace reactordb::occ {

enum class TxnStatus { Active, Validated, Committed, Aborted };
enum class Outcome { Prepared, Conflict };

// (table name, key): gives the deterministic global lock order.
using ItemKey = std::pair<std::string, std::string>;

struct ReadEntry {
  store::Table* table;
  store::Record* rec;  // null if no slot existed at read time
  uint64_t version;    // tid observed (0 when absent)
  bool absent;
};

struct WriteEntry {
  store::Table* table;
  std::string value;
  bool is_insert = false;
  uint64_t subtxn = 0;       // origin sub-transaction, for the trace
  std::string reactor;
  store::Record* rec = nullptr;  // bound during validation
  bool locked = false;
};

struct ScanRecord {
  store::Table* table;
  std::string table_name;
  std::string lo, hi;
  size_t limit;
  bool reverse;
  std::vector<std::pair<std::string, uint64_t>> observed;  // committed at scan time
};

// Per-(root transaction, container) OCC state. Sub-transactions of one root
// may touch it from different workers; ops serialize on mu.
struct ContainerTxnState {
  uint64_t txn_id = 0;
  Tracer* tracer = nullptr;

  std::mutex mu;
  std::map<ItemKey, ReadEntry> read_set;
  std::map<ItemKey, WriteEntry> write_set;  // iterated in sorted order
  std::vector<ScanRecord> scan_set;
  TxnStatus status = TxnStatus::Active;
  uint64_t max_seen_tid = 0;

  const char* conflict_reason = nullptr;
};

struct OpCtx {
  uint64_t subtxn;
  std::string reactor;
};

struct ReadResult {
  bool found = false;
  std::string value;
};

ReadResult txn_read(ContainerTxnState& st, store::Table* t,
                    const std::string& key, const OpCtx& ctx);
void txn_write(ContainerTxnState& st, store::Table* t, const std::string& key,
               std::string value, const OpCtx& ctx);
void txn_insert(ContainerTxnState& st, store::Table* t, const std::string& key,
                std::string value, const OpCtx& ctx);
store::ScanResult txn_scan(ContainerTxnState& st, store::Table* t,
                           const std::string& lo, const std::string& hi,
                           size_t limit, bool reverse, const OpCtx& ctx);

// Phase 1: lock the write set in sorted order, re-check reads and scans.
// On Conflict nothing remains locked.
Outcome validate_and_lock(ContainerTxnState& st);

// Phase 2: publish buffered writes at version tid, release locks.
void install_and_unlock(ContainerTxnState& st, uint64_t tid);

// Abort: drop buffered writes, release anything held.
void release(ContainerTxnState& st);

// Commit TID: exceeds everything this txn observed, the container's previous
// TID, and carries the current epoch in its high bits.
uint64_t acquire_commit_tid(std::atomic<uint64_t>& last_tid, uint64_t epoch,
                            uint64_t max_seen);

}  // namespace reactordb::occ
