#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "reactordb/cost_model.hpp"
#include "reactordb/runtime.hpp"

namespace reactordb::bench {

struct WorkloadSpec {
  std::string benchmark = "smallbank";
  int scale_factor = 1;
  int workers = 1;
  int epochs = 50;
  int epoch_ms = 100;
  long txn_count = 0;  // >0: run exactly this many txns instead of by time
  std::string formulation = "fully-sync";  // smallbank; tpcc uses sync|async
  int txn_size = 1;
  double remote_pct = 1.0;
  std::string dest_strategy = "all-remote";
  double zipfian = 0.99;
  int delay_lo_us = 0, delay_hi_us = 0;
  int simrisk_load = 0;
  std::string strategy = "procedure-parallelism";  // exchange formulations
  std::string mix = "standard";  // tpcc: standard | neworder-only
  uint64_t seed = 1;
  // Partition count the generators use for local/remote classification;
  // the harness fills it in from the plan when 0.
  int partitions = 0;
};

struct TxnReq {
  std::string reactor, proc;
  Args args;
};

// A benchmark binds reactor declarations + types + loader + generator +
// consistency oracle.
struct Workload {
  std::vector<std::pair<std::string, std::string>> reactors;
  std::vector<rt::ReactorType> types;
  std::function<void(rt::Database&)> load;
  std::function<TxnReq(std::mt19937_64&, int worker)> next_txn;
  // Throws std::runtime_error on an invariant violation.
  std::function<void(rt::Database&)> verify;
};

Workload make_smallbank(const WorkloadSpec&);
Workload make_tpcc(const WorkloadSpec&);
Workload make_ycsb(const WorkloadSpec&);
Workload make_exchange(const WorkloadSpec&);
Workload make_noop(const WorkloadSpec&);
Workload make_workload(const WorkloadSpec&);

struct EpochStats {
  int epoch = 0;
  long committed = 0, aborted = 0;
  double mean_latency_us = 0, stddev_us = 0;
};

struct RunResult {
  std::vector<EpochStats> epochs;
  long committed = 0, aborted = 0;
  double mean_latency_us = 0, stddev_us = 0;
  double throughput_tps = 0;
  uint64_t digest = 0;
  std::vector<rt::ProfiledTxn> profiles;  // committed txns, profiling runs only
};

RunResult run(const WorkloadSpec& spec, const plan::DeploymentPlan& plan,
              rt::Options opt = {}, bool collect_profiles = false);

void write_csv(const std::string& path, const RunResult& r);

// Rank-based power law over [0, n): P(i) proportional to 1/(i+1)^theta,
// ranks shuffled over the key space by a fixed multiplicative hash.
class Zipf {
 public:
  Zipf(size_t n, double theta);
  size_t operator()(std::mt19937_64& rng) const;

 private:
  std::vector<double> cdf_;
};

// Deterministic CPU burn via PRNG churn; returns a sink value.
uint64_t spin_us(uint64_t seed, int64_t us);

// ---- cost-model fit pipelines ------------------------------------------

struct FitRow {
  std::string formulation;
  int size = 0;
  double predicted_us = 0, measured_us = 0;
  cost::LatencyBreakdown buckets;
};

struct FitReport {
  cost::Calibration cal;
  double commit_inputgen_us = 0;  // measured at calibration, added to predictions
  std::vector<FitRow> rows;
};

// Calibrate on fully-sync size 1, predict multi-transfer latencies for the
// requested formulations and sizes, measure each point for comparison.
FitReport smallbank_fit(const plan::DeploymentPlan& plan,
                        const std::vector<std::string>& formulations,
                        int max_size, long txns_per_point, uint64_t seed);

// Calibrate on a one-local+one-remote-item new-order profile, then predict
// mean latency at the given cross-warehouse item probabilities.
FitReport neworder_fit(const plan::DeploymentPlan& plan, int scale_factor,
                       const std::vector<double>& remote_pcts,
                       long txns_per_point, uint64_t seed);

cost::ForkJoinNode smallbank_tree(const std::string& formulation, int size,
                                  const cost::Calibration& cal,
                                  int64_t root_fixed_ns);

}  // namespace reactordb::bench
