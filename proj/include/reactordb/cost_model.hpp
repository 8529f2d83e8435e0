#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "reactordb/profile.hpp"

namespace reactordb::cost {

using rt::ProfiledTxn;

// One procedure activation in a fork-join call tree. Times are integer
// nanoseconds so the closed-form recursion and the event simulator can be
// compared for exact equality.
struct ForkJoinNode {
  std::string reactor;                     // k
  int64_t p_seq = 0;                       // work before the fork point
  int64_t p_ovp = 0;                       // caller work overlapped with asyncs
  std::vector<ForkJoinNode> sync_seq;      // sync calls during the sequential part
  std::vector<ForkJoinNode> async_children;  // fan-out, issue order = send order
  std::vector<ForkJoinNode> sync_ovp;      // sync calls during the overlap part
};

// Pairwise communication costs. Same-reactor (and any pair routed to one
// container) is free; pair overrides allow asymmetric links.
struct CostParams {
  int64_t default_cs = 0, default_cr = 0;
  std::map<std::pair<std::string, std::string>, int64_t> cs_pair, cr_pair;
  // Reactors sharing a group label communicate for free.
  std::map<std::string, std::string> group;

  int64_t cs(const std::string& from, const std::string& to) const;
  int64_t cr(const std::string& from, const std::string& to) const;

 private:
  int64_t look(const std::map<std::pair<std::string, std::string>, int64_t>& m,
               int64_t dflt, const std::string& a, const std::string& b) const;
};

// Closed-form latency recursion:
//   L = p_seq + sum over sync_seq (L_c + Cs + Cr)
//     + max( max_i over async (L_i + Cr_i + sum_{j<=i} Cs_j),
//            p_ovp + sum over sync_ovp (L_c + Cs + Cr) )
int64_t estimate_latency(const ForkJoinNode& n, const CostParams& p);

// Independent oracle: discrete-event simulation with one sequential sender
// per parent and unlimited remote parallelism. Must equal estimate_latency.
int64_t simulate_forkjoin(const ForkJoinNode& n, const CostParams& p);

struct Calibration {
  int64_t cs = 0, cr = 0;                       // mean send / reply cost
  std::map<std::string, int64_t> proc_ns;       // mean per-procedure processing
  size_t samples = 0;
};

// Derive parameters from profiled fully-sync size-1 runs: Cs from
// (t_start - t_call), Cr from (t_resume - t_end) of cross-container calls,
// per-procedure processing from (t_end - t_start).
Calibration calibrate(const std::vector<ProfiledTxn>& profiles);

struct LatencyBreakdown {
  int64_t sync_execution = 0;
  int64_t c_s_total = 0;
  int64_t c_r_total = 0;
  int64_t async_execution = 0;
  int64_t commit_plus_inputgen = 0;
  int64_t total = 0;  // == sum of the five buckets by construction
};

LatencyBreakdown decompose(const ProfiledTxn& p);
LatencyBreakdown mean_breakdown(const std::vector<ProfiledTxn>& ps);

}  // namespace reactordb::cost
