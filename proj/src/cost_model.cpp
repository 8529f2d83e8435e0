#include "reactordb/cost_model.hpp"

#include <algorithm>
#include <queue>

namespace reactordb::cost {

int64_t CostParams::look(
    const std::map<std::pair<std::string, std::string>, int64_t>& m,
    int64_t dflt, const std::string& a, const std::string& b) const {
  if (a == b) return 0;
  auto ga = group.find(a), gb = group.find(b);
  if (ga != group.end() && gb != group.end() && ga->second == gb->second)
    return 0;
  auto it = m.find({a, b});
  return it == m.end() ? dflt : it->second;
}

int64_t CostParams::cs(const std::string& from, const std::string& to) const {
  return look(cs_pair, default_cs, from, to);
}
int64_t CostParams::cr(const std::string& from, const std::string& to) const {
  return look(cr_pair, default_cr, from, to);
}

int64_t estimate_latency(const ForkJoinNode& n, const CostParams& p) {
  int64_t L = n.p_seq;
  for (const auto& c : n.sync_seq)
    L += estimate_latency(c, p) + p.cs(n.reactor, c.reactor) +
         p.cr(c.reactor, n.reactor);

  int64_t overlap = n.p_ovp;
  for (const auto& c : n.sync_ovp)
    overlap += estimate_latency(c, p) + p.cs(n.reactor, c.reactor) +
               p.cr(c.reactor, n.reactor);

  int64_t best = overlap;  // async set may be empty; overlap always competes
  int64_t send_prefix = 0;
  for (const auto& c : n.async_children) {
    send_prefix += p.cs(n.reactor, c.reactor);
    best = std::max(best, send_prefix + estimate_latency(c, p) +
                              p.cr(c.reactor, n.reactor));
  }
  return L + best;
}

namespace {

// Events are (time, what-completes); the caller's outbound link is a single
// resource, remote executions are unconstrained.
int64_t sim(const ForkJoinNode& n, const CostParams& p, int64_t start) {
  int64_t t = start + n.p_seq;
  for (const auto& c : n.sync_seq) {
    int64_t arrived = t + p.cs(n.reactor, c.reactor);
    int64_t done = sim(c, p, arrived);
    t = done + p.cr(c.reactor, n.reactor);
  }

  int64_t fork = t;
  std::priority_queue<int64_t, std::vector<int64_t>, std::greater<>> joins;
  int64_t link_free = fork;
  for (const auto& c : n.async_children) {
    link_free += p.cs(n.reactor, c.reactor);  // sends leave one at a time
    int64_t done = sim(c, p, link_free);
    joins.push(done + p.cr(c.reactor, n.reactor));
  }

  int64_t caller = fork + n.p_ovp;
  for (const auto& c : n.sync_ovp) {
    int64_t arrived = caller + p.cs(n.reactor, c.reactor);
    int64_t done = sim(c, p, arrived);
    caller = done + p.cr(c.reactor, n.reactor);
  }

  int64_t last = caller;
  while (!joins.empty()) {
    last = std::max(last, joins.top());
    joins.pop();
  }
  return last;
}

}  // namespace

int64_t simulate_forkjoin(const ForkJoinNode& n, const CostParams& p) {
  return sim(n, p, 0);
}

Calibration calibrate(const std::vector<ProfiledTxn>& profiles) {
  Calibration c;
  int64_t cs_sum = 0, cr_sum = 0;
  size_t comm_n = 0;
  std::map<std::string, std::pair<int64_t, size_t>> procs;
  for (const auto& p : profiles) {
    for (const auto& s : p.subs) {
      // Cross-container: processing is the destination window; send/reply
      // legs feed Cs/Cr. Inline calls: charge the caller-observed window so
      // dispatch overhead lands on the critical path it actually occupies.
      int64_t w = s.cross_container ? s.t_end - s.t_start : s.t_resume - s.t_call;
      if (w >= 0) procs[s.proc].first += w, procs[s.proc].second++;
      if (!s.cross_container) continue;
      cs_sum += s.t_start - s.t_call;
      cr_sum += s.t_resume - s.t_end;
      ++comm_n;
    }
    ++c.samples;
  }
  if (comm_n) {
    c.cs = cs_sum / (int64_t)comm_n;
    c.cr = cr_sum / (int64_t)comm_n;
  }
  for (auto& [name, acc] : procs)
    c.proc_ns[name] = acc.second ? acc.first / (int64_t)acc.second : 0;
  return c;
}

LatencyBreakdown decompose(const ProfiledTxn& p) {
  LatencyBreakdown b;
  b.total = p.input_gen_ns + (p.t_done - p.t_submit);
  b.commit_plus_inputgen = p.input_gen_ns + (p.t_root_start - p.t_submit) +
                           (p.t_done - p.t_root_end);

  // Time the root spent joined on async futures, as merged [t_call,
  // t_resume] windows; sync call comm legs are counted separately.
  std::vector<std::pair<int64_t, int64_t>> wins;
  for (const auto& s : p.subs) {
    if (s.is_async && s.t_resume > s.t_call)
      wins.emplace_back(std::max(s.t_call, p.t_root_start),
                        std::min(s.t_resume, p.t_root_end));
    if (!s.is_async && s.cross_container) {
      b.c_s_total += s.t_start - s.t_call;
      b.c_r_total += s.t_resume - s.t_end;
    }
  }
  std::sort(wins.begin(), wins.end());
  int64_t async_ns = 0;
  bool open = false;
  int64_t cur_lo = 0, cur_hi = 0;
  for (auto [lo, hi] : wins) {
    if (!open || lo > cur_hi) {
      if (open) async_ns += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
      open = true;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (open) async_ns += cur_hi - cur_lo;
  b.async_execution = async_ns;

  b.sync_execution = (p.t_root_end - p.t_root_start) - b.async_execution -
                     b.c_s_total - b.c_r_total;
  if (b.sync_execution < 0) b.sync_execution = 0;
  return b;
}

LatencyBreakdown mean_breakdown(const std::vector<ProfiledTxn>& ps) {
  LatencyBreakdown m;
  if (ps.empty()) return m;
  for (const auto& p : ps) {
    LatencyBreakdown b = decompose(p);
    m.sync_execution += b.sync_execution;
    m.c_s_total += b.c_s_total;
    m.c_r_total += b.c_r_total;
    m.async_execution += b.async_execution;
    m.commit_plus_inputgen += b.commit_plus_inputgen;
    m.total += b.total;
  }
  int64_t n = (int64_t)ps.size();
  m.sync_execution /= n;
  m.c_s_total /= n;
  m.c_r_total /= n;
  m.async_execution /= n;
  m.commit_plus_inputgen /= n;
  m.total /= n;
  return m;
}

}  // namespace reactordb::cost
