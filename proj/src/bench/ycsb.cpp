#include "reactordb/bench.hpp"

namespace reactordb::bench {

namespace {

constexpr size_t kRecordBytes = 100;

std::string slot() { return Key().u64(0); }

// Read-modify-write: bump the counter in the first 8 bytes, keep the pad.
Value do_bump(rt::Txn& t, const Args&) {
  std::string v = as_str(t.read("data", slot()));
  size_t pos = 0;
  uint64_t n = codec::get_u64(v, pos);
  std::string out;
  codec::put_u64(out, n + 1);
  out.append(v.substr(8));
  t.write("data", slot(), out);
  return std::monostate{};
}

// args: the other keys of the transaction (root key excluded); remote ones
// come first so their futures are in flight while local ones execute.
Value do_multi_update(rt::Txn& t, const Args& a) {
  std::vector<rt::Future> fs;
  for (const auto& k : a)
    fs.push_back(t.call_async(as_str(k), "bump", {}));
  do_bump(t, {});
  for (auto& f : fs) t.get(f);
  return std::monostate{};
}

}  // namespace

Workload make_ycsb(const WorkloadSpec& spec) {
  const long n = 10'000L * std::max(1, spec.scale_factor);
  const int parts = std::max(1, spec.partitions);
  const long chunk = (n + parts - 1) / parts;

  rt::ReactorType kv;
  kv.name = "kv";
  kv.schema = [](rt::SchemaBuilder& sb) { sb.table("data", 1, {"payload"}); };
  kv.procedures = {{"bump", do_bump}, {"multi_update", do_multi_update}};

  Workload w;
  w.types = {kv};
  for (long i = 0; i < n; ++i)
    w.reactors.emplace_back("y" + std::to_string(i), "kv");

  w.load = [n](rt::Database& db) {
    std::string pad(kRecordBytes - 8, 'x');
    for (long i = 0; i < n; ++i) {
      std::string v;
      codec::put_u64(v, 0);
      v += pad;
      db.load_row("y" + std::to_string(i), "data", slot(), v);
    }
  };

  auto zipf = std::make_shared<Zipf>(n, spec.zipfian);
  w.next_txn = [=](std::mt19937_64& rng, int) {
    std::vector<long> keys;
    for (int i = 0; i < 10; ++i) {
      long k = (long)(*zipf)(rng);
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        keys.push_back(k);  // duplicates collapse to one update
    }
    size_t root_idx =
        std::uniform_int_distribution<size_t>(0, keys.size() - 1)(rng);
    long root = keys[root_idx];
    keys.erase(keys.begin() + root_idx);
    // Remote-partition keys first, same-partition last.
    std::stable_partition(keys.begin(), keys.end(), [&](long k) {
      return k / chunk != root / chunk;
    });
    TxnReq req{"y" + std::to_string(root), "multi_update", {}};
    for (long k : keys) req.args.push_back("y" + std::to_string(k));
    return req;
  };
  return w;
}

}  // namespace reactordb::bench
