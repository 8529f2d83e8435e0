#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "reactordb/bench.hpp"

namespace reactordb::bench {

Workload make_workload(const WorkloadSpec& s) {
  if (s.benchmark == "smallbank") return make_smallbank(s);
  if (s.benchmark == "tpcc") return make_tpcc(s);
  if (s.benchmark == "ycsb") return make_ycsb(s);
  if (s.benchmark == "exchange") return make_exchange(s);
  if (s.benchmark == "noop") return make_noop(s);
  throw std::invalid_argument("unknown benchmark: " + s.benchmark);
}

Zipf::Zipf(size_t n, double theta) {
  cdf_.resize(n);
  double acc = 0;
  for (size_t i = 0; i < n; ++i) {
    acc += 1.0 / std::pow(double(i + 1), theta);
    cdf_[i] = acc;
  }
  for (auto& v : cdf_) v /= acc;
}

size_t Zipf::operator()(std::mt19937_64& rng) const {
  double u = std::uniform_real_distribution<>(0.0, 1.0)(rng);
  size_t rank =
      std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
  if (rank >= cdf_.size()) rank = cdf_.size() - 1;
  // Spread hot ranks over the key space deterministically.
  return (rank * 0x9e3779b97f4a7c15ull) % cdf_.size();
}

uint64_t spin_us(uint64_t seed, int64_t us) {
  std::mt19937_64 rng(seed);
  uint64_t sink = 0;
  int64_t deadline = rt::now_ns() + us * 1000;
  while (rt::now_ns() < deadline) {
    for (int i = 0; i < 64; ++i) sink ^= rng();
  }
  return sink;
}

namespace {

struct Sample {
  int64_t done_ns;     // completion time relative to run start
  double latency_us;   // includes input generation
  bool committed;
};

}  // namespace

RunResult run(const WorkloadSpec& spec_in, const plan::DeploymentPlan& plan,
              rt::Options opt, bool collect_profiles) {
  WorkloadSpec spec = spec_in;
  if (spec.partitions == 0) {
    size_t execs = 0;
    for (const auto& c : plan.containers) execs += c.executors.size();
    spec.partitions = (int)std::max(plan.containers.size(), execs);
  }
  Workload w = make_workload(spec);
  if (collect_profiles) opt.profile = true;

  rt::Database db(w.reactors, std::move(w.types), plan, opt);
  if (w.load) w.load(db);

  const bool count_mode = spec.txn_count > 0;
  std::atomic<long> budget{spec.txn_count};
  std::atomic<bool> stop{false};
  const int64_t t0 = rt::now_ns();
  const int64_t run_ns = int64_t(spec.epochs) * spec.epoch_ms * 1'000'000;

  std::vector<std::vector<Sample>> samples(spec.workers);
  std::vector<std::vector<rt::ProfiledTxn>> profs(spec.workers);
  std::vector<std::thread> workers;
  workers.reserve(spec.workers);
  for (int wi = 0; wi < spec.workers; ++wi) {
    workers.emplace_back([&, wi] {
      std::mt19937_64 rng(spec.seed * 0x100000001b3ull + wi + 1);
      for (;;) {
        if (count_mode) {
          if (budget.fetch_sub(1) <= 0) return;
        } else if (stop.load(std::memory_order_relaxed) ||
                   rt::now_ns() - t0 >= run_ns) {
          return;
        }
        int64_t g0 = rt::now_ns();
        TxnReq req = w.next_txn(rng, wi);
        int64_t g1 = rt::now_ns();
        auto h = db.submit_root(req.reactor, req.proc, std::move(req.args));
        rt::ClientResult res = h.wait();
        int64_t g2 = rt::now_ns();
        samples[wi].push_back({g2 - t0, double(g2 - g0) / 1000.0,
                               res.committed});
        if (collect_profiles && res.committed) {
          rt::ProfiledTxn p = h.profile();
          p.input_gen_ns = g1 - g0;
          p.t_done = g2;  // client-observed completion, wakeup included
          profs[wi].push_back(std::move(p));
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  db.flush_trace();

  RunResult r;
  r.digest = db.logical_digest();
  if (db.locked_records() != 0)
    throw std::runtime_error("lock flags left set after run");
  if (w.verify) w.verify(db);
  for (auto& p : profs)
    r.profiles.insert(r.profiles.end(), std::make_move_iterator(p.begin()),
                      std::make_move_iterator(p.end()));

  // Per-epoch stats by completion-time bucket (count mode: one bucket).
  int n_epochs = count_mode ? 1 : spec.epochs;
  std::vector<std::vector<double>> lat(n_epochs);
  std::vector<EpochStats> es(n_epochs);
  int64_t last_done = 0;
  for (auto& sv : samples)
    for (const auto& s : sv) {
      int e = count_mode ? 0 : (int)(s.done_ns / (spec.epoch_ms * 1'000'000LL));
      if (e >= n_epochs) e = n_epochs - 1;
      last_done = std::max(last_done, s.done_ns);
      if (s.committed) {
        ++es[e].committed;
        lat[e].push_back(s.latency_us);
      } else {
        ++es[e].aborted;
      }
    }
  double sum = 0, sq = 0;
  long n = 0;
  for (int e = 0; e < n_epochs; ++e) {
    es[e].epoch = e;
    double esum = 0;
    for (double v : lat[e]) esum += v;
    if (!lat[e].empty()) {
      es[e].mean_latency_us = esum / lat[e].size();
      double evar = 0;
      for (double v : lat[e]) evar += (v - es[e].mean_latency_us) *
                                      (v - es[e].mean_latency_us);
      es[e].stddev_us = lat[e].size() > 1
                            ? std::sqrt(evar / (lat[e].size() - 1))
                            : 0;
    }
    r.committed += es[e].committed;
    r.aborted += es[e].aborted;
    for (double v : lat[e]) {
      sum += v;
      ++n;
    }
  }
  if (n) {
    r.mean_latency_us = sum / n;
    for (int e = 0; e < n_epochs; ++e)
      for (double v : lat[e]) sq += (v - r.mean_latency_us) * (v - r.mean_latency_us);
    r.stddev_us = n > 1 ? std::sqrt(sq / (n - 1)) : 0;
  }
  int64_t span = count_mode ? std::max<int64_t>(last_done, 1) : run_ns;
  r.throughput_tps = double(r.committed) * 1e9 / double(span);
  r.epochs = std::move(es);
  return r;
}

void write_csv(const std::string& path, const RunResult& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output: " + path);
  out << "epoch,committed,aborted,mean_latency_us,stddev_us\n";
  for (const auto& e : r.epochs)
    out << e.epoch << ',' << e.committed << ',' << e.aborted << ','
        << e.mean_latency_us << ',' << e.stddev_us << '\n';
}

}  // namespace reactordb::bench
