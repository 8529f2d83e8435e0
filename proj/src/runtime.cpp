#include "reactordb/runtime.hpp"

#include <algorithm>

namespace reactordb::rt {

namespace {
std::string enc1(const Value& v) {
  std::string s;
  codec::encode_value(s, v);
  return s;
}
Value dec1(const std::string& s) {
  size_t pos = 0;
  return codec::decode_value(s, pos);
}
}  // namespace

// ---------------------------------------------------------------- futures

void FutureState::resolve(std::string enc) {
  std::lock_guard lk(mu);
  st = Resolved;
  result = std::move(enc);
  cv.notify_all();
}

void FutureState::fail(std::string why) {
  std::lock_guard lk(mu);
  st = Failed;
  error = std::move(why);
  cv.notify_all();
}

bool FutureState::done() {
  std::lock_guard lk(mu);
  return st != Pending;
}

void FutureState::wait_done() {
  std::unique_lock lk(mu);
  cv.wait(lk, [&] { return st != Pending; });
}

Future Future::resolved(std::string enc) {
  auto s = std::make_shared<FutureState>();
  s->st = FutureState::Resolved;
  s->result = std::move(enc);
  return Future(std::move(s));
}

void ClientFutureState::finish(ClientResult r) {
  std::lock_guard lk(mu);
  if (done) return;
  res = std::move(r);
  done = true;
  cv.notify_all();
}

ClientResult ClientFutureState::wait() {
  std::unique_lock lk(mu);
  cv.wait(lk, [&] { return done; });
  return res;
}

ClientResult ClientHandle::wait() { return st_->wait(); }

ProfiledTxn ClientHandle::profile() const { return root_->prof.snapshot(); }

// ------------------------------------------------------------ reactor info

bool ReactorInfo::admit(uint64_t root_id, uint64_t subtxn) {
  std::lock_guard lk(mu_);
  for (const auto& e : active_)
    if (e.root == root_id && e.subtxn != subtxn) return false;
  active_.push_back({root_id, subtxn});
  return true;
}

void ReactorInfo::leave(uint64_t root_id, uint64_t subtxn) {
  std::lock_guard lk(mu_);
  for (auto it = active_.begin(); it != active_.end(); ++it)
    if (it->root == root_id && it->subtxn == subtxn) {
      active_.erase(it);
      return;
    }
}

// --------------------------------------------------------------- root txn

void RootTxn::set_abort(const std::string& reason) {
  std::lock_guard lk(mu_);
  if (!abort_flag.exchange(true)) reason_ = reason;
}

std::string RootTxn::abort_reason() {
  std::lock_guard lk(mu_);
  return reason_;
}

occ::ContainerTxnState& RootTxn::state_for(int container, Tracer* tr) {
  std::lock_guard lk(mu_);
  auto& slot = states_[container];
  if (!slot) {
    slot = std::make_unique<occ::ContainerTxnState>();
    slot->txn_id = id;
    slot->tracer = tr;
  }
  return *slot;
}

std::map<int, std::unique_ptr<occ::ContainerTxnState>> RootTxn::take_states() {
  std::lock_guard lk(mu_);
  return std::move(states_);
}

// ---------------------------------------------------------------- txn api

const std::string& Txn::reactor() const { return c_.reactor->name; }

void Txn::checkpoint() {
  if (c_.root->abort_flag.load(std::memory_order_relaxed))
    throw TxnAbort("cancelled");
}

std::string Txn::prefixed(const std::string& key) const {
  return Key().str(c_.reactor->name).bytes() + key;
}

static store::Table* need_table(Container* c, const std::string& name) {
  store::Table* t = c->store.get_table(name);
  if (!t) throw std::invalid_argument("unknown table: " + name);
  return t;
}

Value Txn::read(const std::string& table, const std::string& key, bool* found) {
  checkpoint();
  auto* t = need_table(c_.container, table);
  auto& st = c_.root->state_for(c_.container->id, c_.root->db->tracer());
  auto r = occ::txn_read(st, t, prefixed(key), {c_.subtxn, c_.reactor->name});
  if (found) *found = r.found;
  if (!r.found) return std::monostate{};
  return dec1(r.value);
}

void Txn::write(const std::string& table, const std::string& key, const Value& v) {
  checkpoint();
  auto* t = need_table(c_.container, table);
  auto& st = c_.root->state_for(c_.container->id, c_.root->db->tracer());
  occ::txn_write(st, t, prefixed(key), enc1(v), {c_.subtxn, c_.reactor->name});
}

void Txn::insert(const std::string& table, const std::string& key, const Value& v) {
  checkpoint();
  auto* t = need_table(c_.container, table);
  auto& st = c_.root->state_for(c_.container->id, c_.root->db->tracer());
  occ::txn_insert(st, t, prefixed(key), enc1(v), {c_.subtxn, c_.reactor->name});
}

std::vector<std::pair<std::string, Value>> Txn::scan(const std::string& table,
                                                     const std::string& lo,
                                                     const std::string& hi,
                                                     size_t limit, bool reverse) {
  checkpoint();
  auto* t = need_table(c_.container, table);
  auto& st = c_.root->state_for(c_.container->id, c_.root->db->tracer());
  auto res = occ::txn_scan(st, t, prefixed(lo), prefixed(hi), limit, reverse,
                           {c_.subtxn, c_.reactor->name});
  std::vector<std::pair<std::string, Value>> out;
  out.reserve(res.entries.size());
  size_t strip = c_.reactor->name.size() + 1;  // reactor prefix + NUL
  for (auto& e : res.entries)
    out.emplace_back(e.key.substr(strip), dec1(e.value));
  return out;
}

void Txn::abort(const std::string& reason) {
  c_.root->set_abort(reason);
  throw TxnAbort(reason);
}

Value Txn::call(const std::string& reactor, const std::string& proc, Args args) {
  Future f = dispatch(reactor, proc, std::move(args), /*async=*/false);
  return get(f);
}

Future Txn::call_async(const std::string& reactor, const std::string& proc,
                       Args args) {
  return dispatch(reactor, proc, std::move(args), /*async=*/true);
}

Future Txn::dispatch(const std::string& reactor, const std::string& proc,
                     Args args, bool async) {
  checkpoint();
  Database* db = c_.root->db;
  ReactorInfo* ri = db->reactor(reactor);
  if (!ri) throw std::invalid_argument("unknown reactor: " + reactor);
  const Procedure& p = db->find_proc(*ri, proc);
  uint64_t j = c_.root->next_subtxn.fetch_add(1);

  SubProf* sp = nullptr;
  if (c_.root->profiling) {
    sp = c_.root->prof.add_sub();
    sp->proc = proc;
    sp->dest_reactor = reactor;
    sp->is_async = async;
    sp->t_call = now_ns();
  }

  if (ri == c_.reactor) {
    // Self-call: plain inlined execution, no new scope of isolation.
    Value v = db->run_inline(c_, *ri, p, args, j, sp);
    return Future::resolved(enc1(v));
  }

  if (ri->container == c_.container->id) {
    // Same container: run synchronously on this worker. The future comes
    // back already resolved, so the communication legs cost nothing.
    if (!ri->admit(c_.root->id, j)) {
      c_.root->set_abort("dangerous-structure");
      throw TxnAbort("dangerous-structure");
    }
    Value v;
    try {
      v = db->run_inline(c_, *ri, p, args, j, sp);
    } catch (...) {
      ri->leave(c_.root->id, j);
      throw;
    }
    ri->leave(c_.root->id, j);
    return Future::resolved(enc1(v));
  }

  if (sp) sp->cross_container = true;
  auto fs = std::make_shared<FutureState>();
  fs->prof = sp;
  Request r;
  r.root = c_.root;
  r.reactor = reactor;
  r.proc = proc;
  r.args_enc = codec::encode_args(args);
  r.subtxn = j;
  r.fut = fs;
  r.prof = sp;
  db->container(ri->container).route(*ri)->enqueue(std::move(r));
  Future fut(fs);
  c_.children.push_back(fut);
  return fut;
}

Value Txn::get(Future& f) {
  checkpoint();
  if (!f.valid()) throw std::invalid_argument("get on empty future");
  FutureState* fs = f.state();
  if (!fs->done()) {
    c_.executor->block_slot();
    fs->wait_done();
    c_.executor->resume_slot();
  }
  std::lock_guard lk(fs->mu);
  if (fs->prof && fs->prof->t_resume == 0) fs->prof->t_resume = now_ns();
  if (fs->st == FutureState::Failed) {
    c_.root->set_abort(fs->error);
    throw TxnAbort(fs->error);
  }
  return dec1(fs->result);
}

}  // namespace reactordb::rt

namespace reactordb::rt {

// ---------------------------------------------------------------- database

Database::Database(const std::vector<std::pair<std::string, std::string>>& reactors,
                   std::vector<ReactorType> types, plan::DeploymentPlan plan,
                   Options opt)
    : opt_(std::move(opt)), plan_(std::move(plan)), types_(std::move(types)) {
  if (!opt_.trace_path.empty()) tracer_ = std::make_unique<Tracer>(opt_.trace_path);

  for (const auto& cs : plan_.containers) {
    auto c = std::make_unique<Container>();
    c->id = (int)containers_.size();
    c->db = this;
    for (const auto& es : cs.executors)
      c->executors.push_back(std::make_unique<TransactionExecutor>(
          this, c.get(), es.id, es.mpl));
    containers_.push_back(std::move(c));
  }

  auto type_of = [&](const std::string& tname) -> const ReactorType* {
    for (const auto& t : types_)
      if (t.name == tname) return &t;
    throw std::invalid_argument("unknown reactor type: " + tname);
  };

  // (container, type) pairs that already ran their schema creator.
  std::vector<std::pair<int, const ReactorType*>> schema_done;
  for (const auto& [name, tname] : reactors) {
    auto loc = plan_.lookup(name);
    if (!loc) throw plan::PlanError("unmapped-reactor", name);
    const ReactorType* rt = type_of(tname);
    auto ri = std::make_unique<ReactorInfo>();
    ri->name = name;
    ri->type = rt;
    ri->container = loc->first;
    ri->affinity_executor = loc->second;
    if (ri->container < 0 || ri->container >= (int)containers_.size())
      throw plan::PlanError("schema-error", "bad container for " + name);
    auto key = std::make_pair(ri->container, rt);
    if (std::find(schema_done.begin(), schema_done.end(), key) ==
        schema_done.end()) {
      schema_done.push_back(key);
      if (rt->schema) {
        SchemaBuilder sb{&containers_[ri->container]->store};
        rt->schema(sb);
      }
    }
    registry_.emplace(name, std::move(ri));
  }

  epoch_thread_ = std::thread([this] {
    std::unique_lock lk(epoch_mu_);
    while (!shutdown_) {
      epoch_cv_.wait_for(lk, std::chrono::milliseconds(opt_.epoch_ms));
      if (shutdown_) break;
      epoch_.fetch_add(1, std::memory_order_relaxed);
    }
  });
}

Database::~Database() {
  // Let in-flight roots drain so no worker is left waiting on a future
  // owned by an executor we are about to tear down.
  while (inflight.load() > 0)
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  {
    std::lock_guard lk(epoch_mu_);
    shutdown_ = true;
    epoch_cv_.notify_all();
  }
  epoch_thread_.join();
  for (auto& c : containers_)
    for (auto& e : c->executors) e->stop();
  if (tracer_) tracer_->flush();
}

ReactorInfo* Database::reactor(const std::string& name) {
  auto it = registry_.find(name);
  return it == registry_.end() ? nullptr : it->second.get();
}

const Procedure& Database::find_proc(const ReactorInfo& ri,
                                     const std::string& proc) {
  auto it = ri.type->procedures.find(proc);
  if (it == ri.type->procedures.end())
    throw std::invalid_argument("unknown procedure: " + ri.type->name + "." + proc);
  return it->second;
}

ClientHandle Database::submit_root(const std::string& reactor_name,
                                   const std::string& proc, Args args) {
  ReactorInfo* ri = reactor(reactor_name);
  if (!ri) throw std::invalid_argument("unknown reactor: " + reactor_name);
  find_proc(*ri, proc);  // fail fast before enqueuing

  auto root = std::make_shared<RootTxn>();
  root->db = this;
  root->id = next_root_id_.fetch_add(1);
  root->root_reactor = reactor_name;
  root->root_proc = proc;
  root->args_enc = codec::encode_args(args);
  root->cc_disabled = opt_.cc_disabled;
  root->profiling = opt_.profile;
  root->client = std::make_shared<ClientFutureState>();
  root->prof.base.t_submit = now_ns();

  inflight.fetch_add(1);
  Request r;
  r.root = root;
  r.is_root = true;
  r.reactor = reactor_name;
  r.proc = proc;
  r.args_enc = root->args_enc;
  container(ri->container).route(*ri)->enqueue(std::move(r));
  return ClientHandle(root->client, root);
}

ClientResult Database::run_root(const std::string& reactor,
                                const std::string& proc, Args args) {
  return submit_root(reactor, proc, std::move(args)).wait();
}

void Database::run_procedure(SubCtx& ctx, const Procedure& proc,
                             const Args& args, std::string* out_enc) {
  Txn txn(ctx);
  Value v = proc(txn, args);
  join_children(ctx);
  if (out_enc) {
    out_enc->clear();
    codec::encode_value(*out_enc, v);
  }
}

void Database::join_children(SubCtx& ctx) {
  // Implicit join: the enclosing scope finishes only once every future it
  // spawned has settled; any failure dooms the whole root.
  std::string first_error;
  for (auto& f : ctx.children) {
    FutureState* fs = f.state();
    if (!fs->done()) {
      ctx.executor->block_slot();
      fs->wait_done();
      ctx.executor->resume_slot();
    }
    std::lock_guard lk(fs->mu);
    if (fs->prof && fs->prof->t_resume == 0) fs->prof->t_resume = now_ns();
    if (fs->st == FutureState::Failed && first_error.empty())
      first_error = fs->error;
  }
  ctx.children.clear();
  if (!first_error.empty()) {
    ctx.root->set_abort(first_error);
    throw TxnAbort(first_error);
  }
}

Value Database::run_inline(SubCtx& parent, ReactorInfo& dest,
                           const Procedure& proc, const Args& args,
                           uint64_t subtxn, SubProf* sp) {
  SubCtx ctx;
  ctx.root = parent.root;
  ctx.subtxn = subtxn;
  ctx.reactor = &dest;
  ctx.container = parent.container;
  ctx.executor = parent.executor;
  if (sp) sp->t_start = now_ns();
  Txn txn(ctx);
  Value v;
  try {
    v = proc(txn, args);
    join_children(ctx);
  } catch (...) {
    if (sp) sp->t_end = sp->t_resume = now_ns();
    throw;
  }
  if (sp) sp->t_end = sp->t_resume = now_ns();
  return v;
}

void Database::execute_request(Request& r, TransactionExecutor* ex) {
  ReactorInfo* ri = reactor(r.reactor);
  SubCtx ctx;
  ctx.root = r.root;
  ctx.subtxn = r.subtxn;
  ctx.reactor = ri;
  ctx.container = containers_[ri->container].get();
  ctx.executor = ex;

  RootTxn& root = *r.root;
  if (r.is_root) {
    root.prof.base.t_root_start = now_ns();
    bool registered = ri->admit(root.id, 0);
    std::string enc;
    bool failed = false;
    std::string why;
    try {
      if (!registered) throw TxnAbort("dangerous-structure");
      run_procedure(ctx, find_proc(*ri, r.proc), codec::decode_args(r.args_enc),
                    &enc);
      if (root.abort_flag.load()) throw TxnAbort(root.abort_reason());
    } catch (const TxnAbort& a) {
      failed = true;
      why = a.reason;
    } catch (const std::exception& e) {
      failed = true;
      why = e.what();
    }
    if (registered) ri->leave(root.id, 0);
    root.prof.base.t_root_end = now_ns();

    ClientResult res;
    root.prof.base.t_commit_start = now_ns();
    if (failed) {
      root.set_abort(why);
      abort_root(root);
      res = {false, {}, root.abort_reason()};
    } else {
      try {
        commit_root(root);
        size_t pos = 0;
        res = {true, codec::decode_value(enc, pos), {}};
      } catch (const TxnAbort& a) {
        res = {false, {}, a.reason};
      }
    }
    root.prof.base.t_commit_end = root.prof.base.t_done = now_ns();
    root.prof.base.committed = res.committed;
    root.client->finish(std::move(res));
    inflight.fetch_sub(1);
    return;
  }

  // Sub-transaction shipped from another container.
  if (r.prof) r.prof->t_start = now_ns();
  if (root.abort_flag.load()) {
    if (r.prof) r.prof->t_end = now_ns();
    r.fut->fail("cancelled");
    return;
  }
  if (!ri->admit(root.id, r.subtxn)) {
    root.set_abort("dangerous-structure");
    if (r.prof) r.prof->t_end = now_ns();
    r.fut->fail("dangerous-structure");
    return;
  }
  std::string enc;
  try {
    run_procedure(ctx, find_proc(*ri, r.proc), codec::decode_args(r.args_enc),
                  &enc);
    ri->leave(root.id, r.subtxn);
    if (r.prof) r.prof->t_end = now_ns();
    r.fut->resolve(std::move(enc));
  } catch (const TxnAbort& a) {
    ri->leave(root.id, r.subtxn);
    root.set_abort(a.reason);
    if (r.prof) r.prof->t_end = now_ns();
    r.fut->fail(a.reason);
  } catch (const std::exception& e) {
    ri->leave(root.id, r.subtxn);
    root.set_abort(e.what());
    if (r.prof) r.prof->t_end = now_ns();
    r.fut->fail(e.what());
  }
}

void Database::load_row(const std::string& reactor_name, const std::string& table,
                        const std::string& key, const Value& v) {
  ReactorInfo* ri = reactor(reactor_name);
  if (!ri) throw std::invalid_argument("unknown reactor: " + reactor_name);
  store::Table* t = containers_[ri->container]->store.get_table(table);
  if (!t) throw std::invalid_argument("unknown table: " + table);
  std::string full = Key().str(reactor_name).bytes() + key;
  std::string enc;
  codec::encode_value(enc, v);
  t->find_or_create(full)->install(
      std::make_shared<const std::string>(std::move(enc)), store::make_tid(1, 1));
}

uint64_t Database::logical_digest() const {
  // FNV-1a over sorted (table name, key, value) triples across containers.
  std::vector<std::string> rows;
  for (const auto& c : containers_)
    for (store::Table* t : c->store.tables())
      t->for_each_committed([&](const std::string& k, const std::string& v) {
        std::string row = t->schema().table_name;
        row.push_back('\0');
        row += k;
        row.push_back('\0');
        row += v;
        rows.push_back(std::move(row));
      });
  std::sort(rows.begin(), rows.end());
  uint64_t h = 1469598103934665603ull;
  for (const auto& r : rows) {
    for (unsigned char ch : r) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  }
  return h;
}

size_t Database::locked_records() const {
  size_t n = 0;
  for (const auto& c : containers_)
    for (store::Table* t : c->store.tables()) n += t->lock_flags_set();
  return n;
}

void Database::flush_trace() {
  if (tracer_) tracer_->flush();
}

}  // namespace reactordb::rt
