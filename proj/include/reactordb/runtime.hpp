#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "reactordb/codec.hpp"
#include "reactordb/deployment.hpp"
#include "reactordb/occ.hpp"
#include "reactordb/profile.hpp"
#include "reactordb/record_store.hpp"
#include "reactordb/trace.hpp"

namespace reactordb::rt {

class Database;
class TransactionExecutor;
class Txn;
struct Container;
struct ReactorInfo;
struct RootTxn;

// Thrown out of a procedure to unwind a doomed transaction. `reason`
// distinguishes user aborts from conflicts / dangerous structures.
struct TxnAbort : std::runtime_error {
  explicit TxnAbort(std::string r) : std::runtime_error(r), reason(std::move(r)) {}
  std::string reason;
};

struct FutureState {
  std::mutex mu;
  std::condition_variable cv;
  enum St { Pending, Resolved, Failed } st = Pending;
  std::string result;  // encoded Value
  std::string error;
  SubProf* prof = nullptr;

  void resolve(std::string enc);
  void fail(std::string why);
  bool done();
  void wait_done();
};

class Future {
 public:
  Future() = default;
  explicit Future(std::shared_ptr<FutureState> s) : st_(std::move(s)) {}
  static Future resolved(std::string enc);
  bool valid() const { return st_ != nullptr; }
  FutureState* state() const { return st_.get(); }

 private:
  std::shared_ptr<FutureState> st_;
};

using Procedure = std::function<Value(Txn&, const Args&)>;

struct SchemaBuilder {
  store::RecordStore* rs;
  void table(const std::string& name, int key_arity,
             std::vector<std::string> cols) {
    rs->create_table({name, key_arity, std::move(cols)});
  }
};

struct ReactorType {
  std::string name;
  std::function<void(SchemaBuilder&)> schema;
  std::map<std::string, Procedure> procedures;
};

// A named reactor instance: placement plus the active sub-transaction set
// used to reject dangerous structures (two live sub-transactions of one
// root on the same reactor).
struct ReactorInfo {
  std::string name;
  const ReactorType* type = nullptr;
  int container = 0;
  int affinity_executor = -1;

  bool admit(uint64_t root_id, uint64_t subtxn);
  void leave(uint64_t root_id, uint64_t subtxn);

 private:
  std::mutex mu_;
  struct Entry {
    uint64_t root, subtxn;
  };
  std::vector<Entry> active_;
};

struct Options {
  std::string trace_path;
  bool profile = false;
  bool cc_disabled = false;
  int epoch_ms = 40;
};

struct ClientResult {
  bool committed = false;
  Value result;
  std::string abort_reason;
};

struct ClientFutureState {
  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  ClientResult res;
  void finish(ClientResult r);
  ClientResult wait();
};

// Handle returned to the client for one root transaction.
class ClientHandle {
 public:
  ClientHandle() = default;
  ClientHandle(std::shared_ptr<ClientFutureState> st, std::shared_ptr<RootTxn> root)
      : st_(std::move(st)), root_(std::move(root)) {}
  ClientResult wait();
  ProfiledTxn profile() const;  // valid after wait()
  RootTxn* root() const { return root_.get(); }

 private:
  std::shared_ptr<ClientFutureState> st_;
  std::shared_ptr<RootTxn> root_;
};

struct RootTxn {
  Database* db = nullptr;
  uint64_t id = 0;
  std::string root_reactor, root_proc, args_enc;
  bool cc_disabled = false;
  bool profiling = false;
  ProfileCollector prof;
  std::shared_ptr<ClientFutureState> client;

  std::atomic<uint64_t> next_subtxn{1};
  std::atomic<bool> abort_flag{false};

  void set_abort(const std::string& reason);
  std::string abort_reason();

  // One OCC state per container touched; ordered map gives the ascending
  // container-id commit order for free.
  occ::ContainerTxnState& state_for(int container, Tracer* tr);
  std::map<int, std::unique_ptr<occ::ContainerTxnState>> take_states();

 private:
  std::mutex mu_;
  std::string reason_;
  std::map<int, std::unique_ptr<occ::ContainerTxnState>> states_;
};

struct Request {
  std::shared_ptr<RootTxn> root;
  bool is_root = false;
  std::string reactor, proc, args_enc;
  uint64_t subtxn = 0;
  std::shared_ptr<FutureState> fut;  // null for roots
  SubProf* prof = nullptr;
};

// Cooperatively scheduled worker pool over a FIFO queue. At most `mpl`
// requests are active; a worker that blocks on a pending future gives its
// slot back and a fresh thread is spawned if needed to keep draining.
class TransactionExecutor {
 public:
  TransactionExecutor(Database* db, Container* c, int id, int mpl);
  ~TransactionExecutor();

  void enqueue(Request r);
  void stop();

  // Slot handoff around a blocking future wait.
  void block_slot();
  void resume_slot();

  int id() const { return id_; }
  int mpl() const { return mpl_; }
  int max_observed_active() const { return max_active_.load(); }
  size_t threads_spawned() const;

 private:
  void worker_loop();
  void spawn_locked();

  Database* db_;
  Container* container_;
  int id_, mpl_;
  std::mutex mu_;
  std::condition_variable cv_;       // queue admission
  std::condition_variable slot_cv_;  // resume after block
  std::deque<Request> q_;
  int active_ = 0;
  int idle_ = 0;
  bool stop_ = false;
  std::vector<std::thread> threads_;
  std::atomic<int> max_active_{0};
};

struct Container {
  int id = 0;
  Database* db = nullptr;
  store::RecordStore store;
  std::atomic<uint64_t> last_tid{0};
  std::vector<std::unique_ptr<TransactionExecutor>> executors;
  std::atomic<uint32_t> rr = 0;

  TransactionExecutor* route(const ReactorInfo& ri);
};

// Per-call execution context; `Txn` is the facade handed to procedures.
struct SubCtx {
  std::shared_ptr<RootTxn> root;
  uint64_t subtxn = 0;
  ReactorInfo* reactor = nullptr;
  Container* container = nullptr;
  TransactionExecutor* executor = nullptr;
  std::vector<Future> children;
};

class Txn {
 public:
  Txn(SubCtx& ctx) : c_(ctx) {}

  // Record operations, scoped to this reactor's key space.
  Value read(const std::string& table, const std::string& key,
             bool* found = nullptr);
  void write(const std::string& table, const std::string& key, const Value& v);
  void insert(const std::string& table, const std::string& key, const Value& v);
  // Committed-state range scan [lo, hi] (reverse scans hi -> lo), at most
  // `limit` rows; re-validated at commit against phantoms.
  std::vector<std::pair<std::string, Value>> scan(const std::string& table,
                                                  const std::string& lo,
                                                  const std::string& hi,
                                                  size_t limit, bool reverse = false);

  Value call(const std::string& reactor, const std::string& proc, Args args);
  Future call_async(const std::string& reactor, const std::string& proc, Args args);
  Value get(Future& f);

  [[noreturn]] void abort(const std::string& reason);

  const std::string& reactor() const;
  uint64_t subtxn() const { return c_.subtxn; }

 private:
  friend class Database;
  void checkpoint();
  std::string prefixed(const std::string& key) const;
  Future dispatch(const std::string& reactor, const std::string& proc,
                  Args args, bool async);
  SubCtx& c_;
};

class Database {
 public:
  Database(const std::vector<std::pair<std::string, std::string>>& reactors,
           std::vector<ReactorType> types, plan::DeploymentPlan plan,
           Options opt = {});
  ~Database();

  ClientHandle submit_root(const std::string& reactor, const std::string& proc,
                           Args args);
  ClientResult run_root(const std::string& reactor, const std::string& proc,
                        Args args);

  ReactorInfo* reactor(const std::string& name);
  Container& container(int id) { return *containers_[id]; }
  int n_containers() const { return (int)containers_.size(); }
  const plan::DeploymentPlan& plan() const { return plan_; }
  const Options& options() const { return opt_; }
  Tracer* tracer() { return tracer_.get(); }
  uint64_t epoch() const { return epoch_.load(std::memory_order_relaxed); }

  // Bulk load outside transactions (initial population only).
  void load_row(const std::string& reactor, const std::string& table,
                const std::string& key, const Value& v);

  // Order-insensitive digest of committed logical state, comparable across
  // deployment plans (keys carry their reactor prefix).
  uint64_t logical_digest() const;
  size_t locked_records() const;
  void flush_trace();

  // Internal plumbing used by Txn / executors / 2PC.
  void execute_request(Request& r, TransactionExecutor* ex);
  void finish_root(RootTxn& root, SubCtx& ctx, bool user_throw,
                   const std::string& throw_reason);
  std::atomic<int64_t> inflight{0};

 private:
  friend class Txn;
  Value run_inline(SubCtx& parent, ReactorInfo& dest, const Procedure& proc,
                   const Args& args, uint64_t subtxn, SubProf* sp);
  void run_procedure(SubCtx& ctx, const Procedure& proc, const Args& args,
                     std::string* out_enc);
  void join_children(SubCtx& ctx);
  const Procedure& find_proc(const ReactorInfo& ri, const std::string& proc);

  Options opt_;
  plan::DeploymentPlan plan_;
  std::vector<ReactorType> types_;
  std::vector<std::unique_ptr<Container>> containers_;
  std::unordered_map<std::string, std::unique_ptr<ReactorInfo>> registry_;
  std::unique_ptr<Tracer> tracer_;
  std::atomic<uint64_t> next_root_id_{1};
  std::atomic<uint64_t> epoch_{1};
  std::thread epoch_thread_;
  std::mutex epoch_mu_;
  std::condition_variable epoch_cv_;
  bool shutdown_ = false;
};

// Two-phase commit of a root transaction across every container it
// touched; single-container roots skip the distributed dance. Throws
// TxnAbort on validation failure (all locks released first).
void commit_root(RootTxn& root);
void abort_root(RootTxn& root);

}  // namespace reactordb::rt
