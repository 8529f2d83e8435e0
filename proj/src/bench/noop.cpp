#include "reactordb/bench.hpp"

namespace reactordb::bench {

// Fixed-cost probe: measures engine dispatch overhead per invocation; runs
// with concurrency control disabled (Options::cc_disabled).
Workload make_noop(const WorkloadSpec& spec) {
  const int n = std::max(1, spec.scale_factor);

  rt::ReactorType t;
  t.name = "noop";
  t.procedures = {{"noop", [](rt::Txn&, const Args&) -> Value {
                     return std::monostate{};
                   }}};

  Workload w;
  w.types = {t};
  for (int i = 0; i < n; ++i)
    w.reactors.emplace_back("n" + std::to_string(i), "noop");

  w.next_txn = [n](std::mt19937_64& rng, int) {
    long i = std::uniform_int_distribution<long>(0, n - 1)(rng);
    return TxnReq{"n" + std::to_string(i), "noop", {}};
  };
  return w;
}

}  // namespace reactordb::bench
