#include "reactordb/record_store.hpp"

#include <functional>
#include <thread>

namespace reactordb::store {

std::pair<std::shared_ptr<const std::string>, uint64_t> Record::stable_read() const {
  for (int spins = 0;; ++spins) {
    uint64_t w1 = word.load(std::memory_order_acquire);
    if (!is_locked(w1)) {
      auto v = load_val();
      uint64_t w2 = word.load(std::memory_order_acquire);
      if (w1 == w2) return {std::move(v), w1};
    }
    if (spins > 64) std::this_thread::yield();
  }
}

void Record::lock() {
  for (int spins = 0; !try_lock(); ++spins)
    if (spins > 64) std::this_thread::yield();
}

Record* Table::find(const std::string& key) const {
  std::shared_lock lk(mu_);
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : it->second.get();
}

Record* Table::find_or_create(const std::string& key) {
  {
    std::shared_lock lk(mu_);
    auto it = rows_.find(key);
    if (it != rows_.end()) return it->second.get();
  }
  std::unique_lock lk(mu_);
  auto& slot = rows_[key];
  if (!slot) slot = std::make_unique<Record>();
  return slot.get();
}

ScanResult Table::scan_committed(const std::string& lo, const std::string& hi,
                                 size_t limit, bool reverse) const {
  ScanResult out;
  std::shared_lock lk(mu_);
  auto first = rows_.lower_bound(lo);
  auto last = rows_.upper_bound(hi);
  auto emit = [&](const std::string& k, const Record& r) {
    auto [v, w] = r.stable_read();
    if (!v) return true;  // absent slot
    if (out.entries.size() >= limit) return false;
    out.entries.push_back({k, *v, tid_of(w)});
    return true;
  };
  bool complete = true;
  if (!reverse) {
    for (auto it = first; it != last; ++it)
      if (!emit(it->first, *it->second)) { complete = false; break; }
  } else {
    auto it = last;
    while (it != first) {
      --it;
      if (!emit(it->first, *it->second)) { complete = false; break; }
    }
  }
  out.exhausted = complete;
  return out;
}

std::vector<std::pair<std::string, uint64_t>> Table::observe(
    const std::string& lo, const std::string& hi, size_t limit,
    bool reverse) const {
  std::vector<std::pair<std::string, uint64_t>> out;
  std::shared_lock lk(mu_);
  auto first = rows_.lower_bound(lo);
  auto last = rows_.upper_bound(hi);
  auto emit = [&](const std::string& k, const Record& r) {
    uint64_t w = r.word.load(std::memory_order_acquire);
    if (!r.load_val()) return true;
    if (out.size() >= limit) return false;
    out.emplace_back(k, w);
    return true;
  };
  if (!reverse) {
    for (auto it = first; it != last; ++it)
      if (!emit(it->first, *it->second)) break;
  } else {
    auto it = last;
    while (it != first) {
      --it;
      if (!emit(it->first, *it->second)) break;
    }
  }
  return out;
}

void Table::for_each_committed(
    const std::function<void(const std::string&, const std::string&)>& fn) const {
  std::shared_lock lk(mu_);
  for (const auto& [k, rec] : rows_) {
    auto [v, w] = rec->stable_read();
    if (v) fn(k, *v);
  }
}

size_t Table::lock_flags_set() const {
  std::shared_lock lk(mu_);
  size_t n = 0;
  for (const auto& [k, rec] : rows_)
    if (is_locked(rec->word.load())) ++n;
  return n;
}

Table* RecordStore::create_table(TableSchema schema) {
  std::unique_lock lk(mu_);
  auto name = schema.table_name;
  auto [it, fresh] = tables_.try_emplace(name);
  if (!fresh) throw DuplicateTableError(name);
  it->second = std::make_unique<Table>(std::move(schema));
  return it->second.get();
}

Table* RecordStore::get_table(const std::string& name) const {
  std::shared_lock lk(mu_);
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : it->second.get();
}

std::vector<Table*> RecordStore::tables() const {
  std::shared_lock lk(mu_);
  std::vector<Table*> out;
  for (const auto& [n, t] : tables_) out.push_back(t.get());
  return out;
}

}  // namespace reactordb::store
