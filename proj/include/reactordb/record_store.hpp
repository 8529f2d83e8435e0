#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace reactordb::store {

// Version word layout: bit 63 = lock flag, bits 0..62 = TID
// (epoch in the high bits of the TID, sequence below).
constexpr uint64_t kLockBit = 1ull << 63;
constexpr int kEpochShift = 40;

inline uint64_t tid_of(uint64_t word) { return word & ~kLockBit; }
inline bool is_locked(uint64_t word) { return word & kLockBit; }
inline uint64_t make_tid(uint64_t epoch, uint64_t seq) {
  return (epoch << kEpochShift) | seq;
}

struct TableSchema {
  std::string table_name;
  int key_arity = 1;
  std::vector<std::string> value_columns;
};

// One versioned record. The value pointer is swapped atomically on install;
// a null pointer means the key is absent (insert placeholder / no committed
// value). Value bytes are immutable once published.
struct Record {
  std::atomic<uint64_t> word{0};
  std::shared_ptr<const std::string> val;  // atomic_load/atomic_store only

  std::shared_ptr<const std::string> load_val() const {
    return std::atomic_load_explicit(&val, std::memory_order_acquire);
  }

  // Consistent committed snapshot; spins while the lock flag is set.
  // Returns (value-or-null, version word observed).
  std::pair<std::shared_ptr<const std::string>, uint64_t> stable_read() const;

  bool try_lock() {
    uint64_t w = word.load(std::memory_order_acquire);
    if (is_locked(w)) return false;
    return word.compare_exchange_weak(w, w | kLockBit, std::memory_order_acq_rel);
  }
  void lock();  // bounded spin then yield
  void unlock() { word.fetch_and(~kLockBit, std::memory_order_release); }
  // Publish a new value and release the lock in one store.
  void install(std::shared_ptr<const std::string> v, uint64_t tid) {
    std::atomic_store_explicit(&val, std::move(v), std::memory_order_release);
    word.store(tid, std::memory_order_release);
  }
};

struct ScanEntry {
  std::string key;
  std::string value;
  uint64_t version;
};

struct ScanResult {
  std::vector<ScanEntry> entries;
  bool exhausted = false;
};

class Table {
 public:
  explicit Table(TableSchema s) : schema_(std::move(s)) {}

  const TableSchema& schema() const { return schema_; }

  // Committed read. Returns the record slot (stable across rehashes; slots
  // are never removed) or nullptr when no slot exists for the key.
  Record* find(const std::string& key) const;

  // Find the slot, creating an absent placeholder if missing. Used by
  // validation when locking write-set keys.
  Record* find_or_create(const std::string& key);

  // Committed entries in [lo, hi], up to limit, skipping absent slots.
  // reverse=true walks descending from hi.
  ScanResult scan_committed(const std::string& lo, const std::string& hi,
                            size_t limit, bool reverse) const;

  // Observed (key, version) list for phantom revalidation: same walk as
  // scan_committed but records versions only (self-locked slots allowed by
  // the caller's comparison).
  std::vector<std::pair<std::string, uint64_t>> observe(const std::string& lo,
                                                        const std::string& hi,
                                                        size_t limit,
                                                        bool reverse) const;

  // Quiescent helpers (tests, loaders, digests).
  void for_each_committed(
      const std::function<void(const std::string&, const std::string&)>& fn) const;
  size_t lock_flags_set() const;

 private:
  TableSchema schema_;
  mutable std::shared_mutex mu_;  // protects map structure only
  std::map<std::string, std::unique_ptr<Record>> rows_;
};

class DuplicateTableError : public std::runtime_error {
 public:
  explicit DuplicateTableError(const std::string& n)
      : std::runtime_error("duplicate-table: " + n) {}
};

// Per-container table registry.
class RecordStore {
 public:
  Table* create_table(TableSchema schema);
  Table* get_table(const std::string& name) const;  // nullptr if missing
  std::vector<Table*> tables() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::unique_ptr<Table>> tables_;
};

}  // namespace reactordb::store
