#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "reactordb/bench.hpp"
#include "reactordb/checker.hpp"

using namespace reactordb;

namespace {

plan::DeploymentPlan load_plan(const std::string& path,
                               const bench::WorkloadSpec& spec) {
  if (!path.empty()) return plan::parse_plan_file(path);
  // No plan given: shared-everything-with-affinity, one executor per worker.
  std::vector<std::string> names;
  for (const auto& [n, t] : bench::make_workload(spec).reactors)
    names.push_back(n);
  return plan::build_strategy(plan::Strategy::S2, std::max(1, spec.workers),
                              names);
}

void print_fit(const bench::FitReport& rep) {
  std::cout << "formulation,size,predicted_us,measured_us,sync_us,cs_us,cr_us,"
               "async_us,commit_inputgen_us\n";
  for (const auto& r : rep.rows)
    std::cout << r.formulation << ',' << r.size << ',' << r.predicted_us << ','
              << r.measured_us << ',' << r.buckets.sync_execution / 1000.0
              << ',' << r.buckets.c_s_total / 1000.0 << ','
              << r.buckets.c_r_total / 1000.0 << ','
              << r.buckets.async_execution / 1000.0 << ','
              << r.buckets.commit_plus_inputgen / 1000.0 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reactordb: relational-actor database benchmark toolkit"};
  app.require_subcommand(1);

  // ---- bench ----
  bench::WorkloadSpec spec;
  std::string config, out = "results.csv", trace, delay = "0:0";
  auto* b = app.add_subcommand("bench", "run a benchmark");
  b->add_option("--config", config, "deployment plan JSON");
  b->add_option("--benchmark", spec.benchmark,
                "smallbank|tpcc|ycsb|exchange|noop");
  b->add_option("--workers", spec.workers);
  b->add_option("--scale-factor", spec.scale_factor);
  b->add_option("--epochs", spec.epochs);
  b->add_option("--epoch-ms", spec.epoch_ms);
  b->add_option("--txn-count", spec.txn_count,
                "run a fixed transaction count instead of timed epochs");
  b->add_option("--formulation", spec.formulation);
  b->add_option("--txn-size", spec.txn_size);
  b->add_option("--remote-pct", spec.remote_pct);
  b->add_option("--dest-strategy", spec.dest_strategy);
  b->add_option("--zipfian", spec.zipfian);
  b->add_option("--delay-us", delay, "LO:HI spin per stock update");
  b->add_option("--simrisk-load", spec.simrisk_load);
  b->add_option("--strategy", spec.strategy, "exchange call strategy");
  b->add_option("--mix", spec.mix, "tpcc mix: standard|neworder-only");
  b->add_option("--seed", spec.seed);
  b->add_option("--out", out);
  b->add_option("--trace", trace, "write an operation trace to this file");

  // ---- check-trace ----
  std::string trace_file;
  auto* c = app.add_subcommand("check-trace", "serializability-check a trace");
  c->add_option("file", trace_file)->required();

  // ---- cost ----
  auto* co = app.add_subcommand("cost", "cost model tools");
  co->require_subcommand(1);
  std::string cost_config;
  uint64_t cost_seed = 1;
  long cost_txns = 400;
  int cost_max_size = 7;
  for (auto* sub : {co->add_subcommand("estimate",
                                       "calibrate + predict vs measured"),
                    co->add_subcommand("calibrate", "print parameters"),
                    co->add_subcommand("decompose", "latency buckets")}) {
    sub->add_option("--config", cost_config, "deployment plan JSON");
    sub->add_option("--seed", cost_seed);
    sub->add_option("--txn-count", cost_txns);
    sub->add_option("--max-size", cost_max_size);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (b->parsed()) {
      if (auto p = delay.find(':'); p != std::string::npos) {
        spec.delay_lo_us = std::stoi(delay.substr(0, p));
        spec.delay_hi_us = std::stoi(delay.substr(p + 1));
      }
      plan::DeploymentPlan dp = load_plan(config, spec);
      rt::Options opt;
      opt.trace_path = trace;
      opt.cc_disabled = spec.benchmark == "noop";
      bench::RunResult r = bench::run(spec, dp, opt);
      bench::write_csv(out, r);
      std::cout << "committed=" << r.committed << " aborted=" << r.aborted
                << " mean_latency_us=" << r.mean_latency_us
                << " stddev_us=" << r.stddev_us
                << " throughput_tps=" << r.throughput_tps
                << " digest=" << std::hex << r.digest << std::dec << '\n';
      return 0;
    }
    if (c->parsed()) {
      chk::History h = chk::parse_trace_file(trace_file);
      bool reactor_ok = chk::is_serializable(h);
      bool classic_ok = chk::is_serializable(chk::project(h));
      std::cout << "reactor-model: "
                << (reactor_ok ? "serializable" : "NOT serializable") << '\n'
                << "classic-model: "
                << (classic_ok ? "serializable" : "NOT serializable") << '\n';
      return reactor_ok && classic_ok ? 0 : 1;
    }
    // cost subcommands all run against Smallbank on a shared-nothing plan.
    std::vector<std::string> names;
    plan::DeploymentPlan dp;
    if (!cost_config.empty()) {
      dp = plan::parse_plan_file(cost_config);
    } else {
      for (int i = 0; i < 7000; ++i) names.push_back("c" + std::to_string(i));
      dp = plan::build_strategy(plan::Strategy::S3, 7, names);
    }
    if (co->get_subcommand("calibrate")->parsed()) {
      bench::FitReport rep =
          bench::smallbank_fit(dp, {}, 1, cost_txns, cost_seed);
      std::cout << "cs_us=" << rep.cal.cs / 1000.0
                << " cr_us=" << rep.cal.cr / 1000.0
                << " commit_inputgen_us=" << rep.commit_inputgen_us << '\n';
      for (const auto& [proc, ns] : rep.cal.proc_ns)
        std::cout << proc << "_us=" << ns / 1000.0 << '\n';
      return 0;
    }
    std::vector<std::string> forms =
        co->get_subcommand("decompose")->parsed()
            ? std::vector<std::string>{"fully-sync", "partially-async",
                                       "fully-async", "opt"}
            : std::vector<std::string>{"fully-sync", "opt"};
    print_fit(bench::smallbank_fit(dp, forms, cost_max_size, cost_txns,
                                   cost_seed));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
