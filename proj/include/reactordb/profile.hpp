#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

namespace reactordb::rt {

inline int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// One sub-transaction call as seen by the profiler. For cross-container
// calls, [t_call, t_start) is the send path (C_s raw material), [t_start,
// t_end) destination processing, [t_end, t_resume) the reply path (C_r).
struct SubProf {
  std::string proc;
  std::string dest_reactor;
  bool cross_container = false;
  bool is_async = false;  // caller did not block on the future immediately
  int64_t t_call = 0, t_start = 0, t_end = 0, t_resume = 0;
};

struct ProfiledTxn {
  int64_t t_submit = 0, t_root_start = 0, t_root_end = 0;
  int64_t t_commit_start = 0, t_commit_end = 0, t_done = 0;
  int64_t input_gen_ns = 0;  // filled by the harness
  bool committed = false;
  std::vector<SubProf> subs;
};

class ProfileCollector {
 public:
  SubProf* add_sub() {
    std::lock_guard lk(mu_);
    return &subs_.emplace_back();
  }
  ProfiledTxn snapshot() const {
    ProfiledTxn p = base;
    std::lock_guard lk(mu_);
    p.subs.assign(subs_.begin(), subs_.end());
    return p;
  }
  ProfiledTxn base;  // stamped single-threaded by the root worker / client

 private:
  mutable std::mutex mu_;
  std::deque<SubProf> subs_;  // deque: stable pointers
};

}  // namespace reactordb::rt
