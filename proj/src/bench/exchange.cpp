#include "reactordb/bench.hpp"

namespace reactordb::bench {

namespace {

constexpr size_t kWindow = 800;        // unsettled orders per risk scan
constexpr long kOrdersPerProvider = 30'000;
constexpr int64_t kCachePeriod = 100;  // orders a cached risk stays fresh
constexpr double kPExposureLimit = 1e13;
constexpr double kGRiskLimit = 1e12;

std::string pack(const Args& a) { return codec::encode_args(a); }
Args unpack(const Value& v) { return codec::decode_args(as_str(v)); }

uint64_t spin_count(uint64_t seed, int64_t n) {
  std::mt19937_64 rng(seed);
  uint64_t sink = 0;
  for (int64_t i = 0; i < n; ++i) sink ^= rng();
  return sink;
}

double window_exposure(rt::Txn& t) {
  auto rows = t.scan("orders", Key().u64(0), Key().u64(~0ull), kWindow,
                     /*reverse=*/true);
  double sum = 0;
  for (auto& [k, v] : rows) sum += as_double(v);
  return sum;
}

// Scan-only leg used by the query-parallelism formulation.
Value do_scan_exposure(rt::Txn& t, const Args&) { return window_exposure(t); }

// Full per-provider risk: cached within kCachePeriod orders, otherwise a
// window scan plus the simulated risk computation.
Value do_calc_risk(rt::Txn& t, const Args& a) {
  int64_t load = as_int(a[0]);
  Args meta = unpack(t.read("meta", Key().u64(0)));
  int64_t count = as_int(meta[0]);
  bool found = false;
  Value cached = t.read("risk_cache", Key().u64(0), &found);
  if (found) {
    Args c = unpack(cached);
    if (count - as_int(c[1]) < kCachePeriod) return as_double(c[0]);
  }
  double exposure = window_exposure(t);
  spin_count(uint64_t(count) * 31 + 7, load);
  double risk = exposure * 1e-6;
  t.write("risk_cache", Key().u64(0), pack({risk, count}));
  return risk;
}

Value do_add_entry(rt::Txn& t, const Args& a) {
  double amount = as_double(a[0]);
  Args meta = unpack(t.read("meta", Key().u64(0)));
  int64_t count = as_int(meta[0]);
  double exposure = as_double(meta[1]);
  if (exposure + amount > kPExposureLimit) t.abort("p-exposure");
  t.insert("orders", Key().u64(count + 1), amount);
  t.write("meta", Key().u64(0), pack({count + 1, exposure + amount}));
  return std::monostate{};
}

// args: [strategy, simrisk_load, amount, target, provider...]
Value do_auth_pay(rt::Txn& t, const Args& a) {
  const std::string& strategy = as_str(a[0]);
  int64_t load = as_int(a[1]);
  double amount = as_double(a[2]);
  const std::string& target = as_str(a[3]);

  double total_risk = 0;
  if (strategy == "sequential") {
    for (size_t i = 4; i < a.size(); ++i)
      total_risk += as_double(t.call(as_str(a[i]), "calc_risk", {load}));
  } else if (strategy == "query-parallelism") {
    std::vector<rt::Future> fs;
    for (size_t i = 4; i < a.size(); ++i)
      fs.push_back(t.call_async(as_str(a[i]), "scan_exposure", {}));
    for (size_t i = 0; i < fs.size(); ++i) {
      double exposure = as_double(t.get(fs[i]));
      spin_count(uint64_t(i) * 131 + 3, load);  // sim_risk at the exchange
      total_risk += exposure * 1e-6;
    }
  } else if (strategy == "procedure-parallelism") {
    std::vector<rt::Future> fs;
    for (size_t i = 4; i < a.size(); ++i)
      fs.push_back(t.call_async(as_str(a[i]), "calc_risk", {load}));
    for (auto& f : fs) total_risk += as_double(t.get(f));
  } else {
    throw std::invalid_argument("unknown exchange strategy: " + strategy);
  }

  Value cur = t.read("settlement", Key().u64(0));
  if (total_risk > kGRiskLimit) return std::string("rejected");
  t.call(target, "add_entry", {amount});
  t.write("settlement", Key().u64(0), as_double(cur) + amount);
  return std::string("accepted");
}

}  // namespace

Workload make_exchange(const WorkloadSpec& spec) {
  const int K = std::max(1, spec.scale_factor);

  rt::ReactorType ex;
  ex.name = "exchange";
  ex.schema = [](rt::SchemaBuilder& sb) {
    sb.table("settlement", 1, {"total"});
  };
  ex.procedures = {{"auth_pay", do_auth_pay}};

  rt::ReactorType prov;
  prov.name = "provider";
  prov.schema = [](rt::SchemaBuilder& sb) {
    sb.table("orders", 1, {"amount"});
    sb.table("meta", 1, {"order_count", "exposure"});
    sb.table("risk_cache", 1, {"risk", "at_count"});
  };
  prov.procedures = {{"calc_risk", do_calc_risk},
                     {"scan_exposure", do_scan_exposure},
                     {"add_entry", do_add_entry}};

  Workload w;
  w.types = {ex, prov};
  w.reactors.emplace_back("exchange", "exchange");
  for (int i = 0; i < K; ++i)
    w.reactors.emplace_back("p" + std::to_string(i), "provider");

  w.load = [K](rt::Database& db) {
    db.load_row("exchange", "settlement", Key().u64(0), 0.0);
    for (int p = 0; p < K; ++p) {
      std::string name = "p" + std::to_string(p);
      double exposure = 0;
      for (long o = 1; o <= kOrdersPerProvider; ++o) {
        double amt = double(1 + (o * 7 + p) % 100);
        db.load_row(name, "orders", Key().u64(o), amt);
        exposure += amt;
      }
      db.load_row(name, "meta", Key().u64(0),
                  std::string(pack({int64_t(kOrdersPerProvider), exposure})));
    }
  };

  std::string strategy = spec.strategy;
  int64_t load = spec.simrisk_load;
  w.next_txn = [=](std::mt19937_64& rng, int) {
    auto uni = [&](int64_t lo, int64_t hi) {
      return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
    };
    TxnReq req{"exchange", "auth_pay",
               {strategy, load, double(uni(1, 100)),
                "p" + std::to_string(uni(0, K - 1))}};
    for (int p = 0; p < K; ++p) req.args.push_back("p" + std::to_string(p));
    return req;
  };
  return w;
}

}  // namespace reactordb::bench
