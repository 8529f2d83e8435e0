#include "reactordb/runtime.hpp"

namespace reactordb::rt {

TransactionExecutor::TransactionExecutor(Database* db, Container* c, int id, int mpl)
    : db_(db), container_(c), id_(id), mpl_(mpl) {}

TransactionExecutor::~TransactionExecutor() { stop(); }

void TransactionExecutor::enqueue(Request r) {
  std::unique_lock lk(mu_);
  if (stop_) {
    lk.unlock();
    if (r.fut) r.fut->fail("shutdown");
    if (r.is_root && r.root->client)
      r.root->client->finish({false, {}, "shutdown"});
    return;
  }
  q_.push_back(std::move(r));
  // Every live thread busy or blocked: add one so the queue keeps moving.
  if (idle_ == 0) spawn_locked();
  cv_.notify_one();
}

void TransactionExecutor::spawn_locked() {
  threads_.emplace_back([this] { worker_loop(); });
}

void TransactionExecutor::worker_loop() {
  std::unique_lock lk(mu_);
  for (;;) {
    ++idle_;
    cv_.wait(lk, [&] { return stop_ || (!q_.empty() && active_ < mpl_); });
    --idle_;
    if (stop_) return;
    Request r = std::move(q_.front());
    q_.pop_front();
    ++active_;
    int a = active_;
    int prev = max_active_.load(std::memory_order_relaxed);
    while (a > prev &&
           !max_active_.compare_exchange_weak(prev, a, std::memory_order_relaxed)) {
    }
    lk.unlock();
    db_->execute_request(r, this);
    lk.lock();
    --active_;
    cv_.notify_one();
    slot_cv_.notify_one();
  }
}

void TransactionExecutor::block_slot() {
  std::unique_lock lk(mu_);
  --active_;
  cv_.notify_one();
  slot_cv_.notify_one();
}

void TransactionExecutor::resume_slot() {
  std::unique_lock lk(mu_);
  slot_cv_.wait(lk, [&] { return stop_ || active_ < mpl_; });
  ++active_;
}

void TransactionExecutor::stop() {
  std::vector<std::thread> ts;
  std::deque<Request> leftover;
  {
    std::unique_lock lk(mu_);
    if (stop_) return;
    stop_ = true;
    leftover.swap(q_);
    ts.swap(threads_);
    cv_.notify_all();
    slot_cv_.notify_all();
  }
  for (auto& r : leftover) {
    if (r.fut) r.fut->fail("shutdown");
    if (r.is_root && r.root->client)
      r.root->client->finish({false, {}, "shutdown"});
  }
  for (auto& t : ts) t.join();
}

size_t TransactionExecutor::threads_spawned() const {
  std::unique_lock lk(const_cast<std::mutex&>(mu_));
  return threads_.size();
}

TransactionExecutor* Container::route(const ReactorInfo& ri) {
  if (db->plan().router == plan::RouterPolicy::Affinity &&
      ri.affinity_executor >= 0 &&
      ri.affinity_executor < (int)executors.size())
    return executors[ri.affinity_executor].get();
  return executors[rr.fetch_add(1, std::memory_order_relaxed) % executors.size()]
      .get();
}

}  // namespace reactordb::rt
