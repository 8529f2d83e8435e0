#include <cstdlib>

#include "reactordb/bench.hpp"

namespace reactordb::bench {

namespace {

constexpr int64_t kInitBalance = 10'000;

// Debug knob: force the asynchronous formulations to execute their
// transfers one at a time (issue + immediate join).
bool seq_transfer() {
  static bool v = [] {
    const char* e = std::getenv("env_seq_transfer");
    return e && *e;
  }();
  return v;
}

std::string cust_key() { return Key().u64(0); }

int64_t checking(rt::Txn& t) { return as_int(t.read("checking", cust_key())); }

Value do_credit(rt::Txn& t, const Args& a) {
  t.write("checking", cust_key(), checking(t) + as_int(a[0]));
  return std::monostate{};
}

Value do_debit(rt::Txn& t, const Args& a) {
  int64_t bal = checking(t);
  int64_t amt = as_int(a[0]);
  if (bal < amt) t.abort("insufficient-funds");
  t.write("checking", cust_key(), bal - amt);
  return std::monostate{};
}

Value do_transact_saving(rt::Txn& t, const Args& a) {
  int64_t bal = as_int(t.read("savings", cust_key()));
  int64_t amt = as_int(a[1]);
  if (as_str(a[0]) == "debit") {
    if (bal < amt) t.abort("insufficient-funds");
    amt = -amt;
  }
  t.write("savings", cust_key(), bal + amt);
  return std::monostate{};
}

Value do_balance(rt::Txn& t, const Args&) {
  return as_int(t.read("savings", cust_key())) + checking(t);
}

// args: [amount, dest...]; one credit per destination.
Value mt_sync(rt::Txn& t, const Args& a) {
  int64_t amt = as_int(a[0]);
  for (size_t i = 1; i < a.size(); ++i) {
    t.call(as_str(a[i]), "credit", {amt});
    t.call(t.reactor(), "debit", {amt});
  }
  return std::monostate{};
}

Value mt_partial(rt::Txn& t, const Args& a) {
  int64_t amt = as_int(a[0]);
  for (size_t i = 1; i < a.size(); ++i) {
    rt::Future f = t.call_async(as_str(a[i]), "credit", {amt});
    t.call(t.reactor(), "debit", {amt});
    t.get(f);
  }
  return std::monostate{};
}

Value mt_fully_async(rt::Txn& t, const Args& a) {
  int64_t amt = as_int(a[0]);
  std::vector<rt::Future> fs;
  for (size_t i = 1; i < a.size(); ++i) {
    fs.push_back(t.call_async(as_str(a[i]), "credit", {amt}));
    if (seq_transfer()) t.get(fs.back());
  }
  for (size_t i = 1; i < a.size(); ++i) t.call(t.reactor(), "debit", {amt});
  for (auto& f : fs) t.get(f);
  return std::monostate{};
}

Value mt_opt(rt::Txn& t, const Args& a) {
  int64_t amt = as_int(a[0]);
  std::vector<rt::Future> fs;
  for (size_t i = 1; i < a.size(); ++i) {
    fs.push_back(t.call_async(as_str(a[i]), "credit", {amt}));
    if (seq_transfer()) t.get(fs.back());
  }
  t.call(t.reactor(), "debit", {amt * int64_t(a.size() - 1)});  // one full-amount debit
  for (auto& f : fs) t.get(f);
  return std::monostate{};
}

}  // namespace

Workload make_smallbank(const WorkloadSpec& spec) {
  const long n = 1000L * spec.scale_factor;
  const int parts = std::max(1, spec.partitions);
  const long chunk = (n + parts - 1) / parts;

  rt::ReactorType cust;
  cust.name = "customer";
  cust.schema = [](rt::SchemaBuilder& sb) {
    sb.table("account", 1, {"customer_id"});
    sb.table("savings", 1, {"balance"});
    sb.table("checking", 1, {"balance"});
  };
  cust.procedures = {
      {"credit", do_credit},
      {"debit", do_debit},
      {"transact_saving", do_transact_saving},
      {"balance", do_balance},
      {"multi_transfer_sync", mt_sync},
      {"multi_transfer_partial", mt_partial},
      {"multi_transfer_fully_async", mt_fully_async},
      {"multi_transfer_opt", mt_opt},
  };
  if (spec.delay_hi_us > 0) {
    // Same knob as the stock-update delay: pad each transfer leg with CPU
    // work to emulate heavier procedures.
    const int lo = spec.delay_lo_us, hi = std::max(spec.delay_hi_us, lo);
    auto padded = [lo, hi](rt::Procedure inner) -> rt::Procedure {
      return [inner, lo, hi](rt::Txn& t, const Args& a) -> Value {
        Value v = inner(t, a);
        spin_us(t.subtxn() + 1, lo + int64_t(t.subtxn()) % (hi - lo + 1));
        return v;
      };
    };
    cust.procedures["credit"] = padded(do_credit);
    cust.procedures["debit"] = padded(do_debit);
  }

  Workload w;
  w.types = {cust};
  w.reactors.reserve(n);
  for (long i = 0; i < n; ++i)
    w.reactors.emplace_back("c" + std::to_string(i), "customer");

  w.load = [n](rt::Database& db) {
    for (long i = 0; i < n; ++i) {
      std::string name = "c" + std::to_string(i);
      db.load_row(name, "account", Key().str(name), int64_t(i));
      db.load_row(name, "savings", cust_key(), kInitBalance);
      db.load_row(name, "checking", cust_key(), kInitBalance);
    }
  };

  std::string proc = "multi_transfer_sync";
  if (spec.formulation == "partially-async") proc = "multi_transfer_partial";
  else if (spec.formulation == "fully-async") proc = "multi_transfer_fully_async";
  else if (spec.formulation == "opt") proc = "multi_transfer_opt";
  else if (spec.formulation != "fully-sync")
    throw std::invalid_argument("unknown formulation: " + spec.formulation);

  std::string strat = spec.dest_strategy;
  int size = spec.txn_size;
  auto rr = std::make_shared<std::atomic<long>>(0);
  w.next_txn = [=](std::mt19937_64& rng, int) {
    auto uni = [&](long lo, long hi) {
      return (long)std::uniform_int_distribution<long>(lo, hi)(rng);
    };
    long src = uni(0, n - 1);
    long sp = src / chunk;
    TxnReq req{"c" + std::to_string(src), proc, {int64_t(1)}};
    for (int d = 0; d < size; ++d) {
      long dest;
      if (strat == "local") {
        do {
          dest = sp * chunk + uni(0, std::min(chunk, n - sp * chunk) - 1);
        } while (dest == src && chunk > 1);
        if (dest == src) dest = (src + 1) % n;  // degenerate 1-wide partition
      } else if (strat == "all-remote") {
        do {
          dest = uni(0, n - 1);
        } while (parts > 1 ? dest / chunk == sp : dest == src);
      } else if (strat == "round-robin-remote") {
        long p = rr->fetch_add(1) % std::max(1, parts - 1);
        if (p >= sp) ++p;
        dest = p * chunk + uni(0, std::min(chunk, n - p * chunk) - 1);
      } else if (strat == "round-robin-all") {
        long p = rr->fetch_add(1) % parts;
        dest = p * chunk + uni(0, std::min(chunk, n - p * chunk) - 1);
        if (dest == src) dest = (src + 1) % n;
      } else if (strat == "random") {
        do {
          dest = uni(0, n - 1);
        } while (dest == src);
      } else {
        throw std::invalid_argument("unknown dest strategy: " + strat);
      }
      req.args.push_back("c" + std::to_string(dest));
    }
    return req;
  };

  w.verify = [n](rt::Database& db) {
    int64_t total = 0;
    for (int c = 0; c < db.n_containers(); ++c)
      for (const char* tbl : {"savings", "checking"}) {
        auto* t = db.container(c).store.get_table(tbl);
        if (!t) continue;
        t->for_each_committed([&](const std::string&, const std::string& v) {
          size_t pos = 0;
          total += as_int(codec::decode_value(v, pos));
        });
      }
    if (total != 2 * kInitBalance * n)
      throw std::runtime_error("balance conservation violated");
  };
  return w;
}

}  // namespace reactordb::bench
