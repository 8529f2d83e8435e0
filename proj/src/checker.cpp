#include "reactordb/checker.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "reactordb/codec.hpp"

namespace reactordb::chk {

History parse_trace(std::istream& in) {
  History h;
  std::string line;
  uint64_t last_seq = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    TraceOp op;
    std::string a, b, c, d, e, f, g;
    ls >> a >> b >> c;
    if (!ls) throw std::runtime_error("malformed trace line: " + line);
    op.seq = std::stoull(a);
    op.txn = std::stoull(b);
    if (c == "c" || c == "a") {
      op.kind = c == "c" ? TraceOp::Commit : TraceOp::Abort;
    } else {
      ls >> d >> e >> f >> g;
      if (!ls || (g != "r" && g != "w"))
        throw std::runtime_error("malformed trace line: " + line);
      op.subtxn = std::stoull(c);
      op.reactor = d;
      op.item = e + '\0' + unhex(f);
      op.kind = g == "r" ? TraceOp::Read : TraceOp::Write;
    }
    if (op.seq <= last_seq)
      throw std::runtime_error("trace sequence not increasing");
    last_seq = op.seq;
    h.ops.push_back(std::move(op));
  }
  return h;
}

History parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  return parse_trace(in);
}

History project(const History& h) {
  History out;
  out.model = Model::Classic;
  out.ops.reserve(h.ops.size());
  for (const auto& op : h.ops) {
    TraceOp p = op;
    if (op.kind == TraceOp::Read || op.kind == TraceOp::Write) {
      p.item = op.reactor + '\0' + op.item;  // k concatenated with x
      p.reactor.clear();
      p.subtxn = 0;  // sub-transactions are unrolled away
    }
    out.ops.push_back(std::move(p));
  }
  return out;
}

namespace {

std::set<uint64_t> committed_txns(const History& h) {
  std::set<uint64_t> c;
  for (const auto& op : h.ops)
    if (op.kind == TraceOp::Commit) c.insert(op.txn);
  return c;
}

// In the reactor model the conflicting item is (reactor, x); after
// projection the reactor is folded into the item name. Either way two ops
// conflict iff they touch the same qualified item and one writes.
std::string qualified(const History& h, const TraceOp& op) {
  if (h.model == Model::Reactor) return op.reactor + '\0' + op.item;
  return op.item;
}

}  // namespace

bool SerializationGraph::acyclic() const {
  std::map<uint64_t, std::vector<uint64_t>> adj;
  std::map<uint64_t, int> indeg;
  for (uint64_t n : nodes) indeg[n] = 0;
  for (const auto& e : edges) {
    adj[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::vector<uint64_t> ready;
  for (auto& [n, d] : indeg)
    if (d == 0) ready.push_back(n);
  size_t seen = 0;
  while (!ready.empty()) {
    uint64_t n = ready.back();
    ready.pop_back();
    ++seen;
    for (uint64_t m : adj[n])
      if (--indeg[m] == 0) ready.push_back(m);
  }
  return seen == nodes.size();
}

SerializationGraph build_sg(const History& h) {
  auto committed = committed_txns(h);
  SerializationGraph g;
  g.nodes.assign(committed.begin(), committed.end());

  // Per item, the committed reads/writes in history order.
  struct Acc {
    std::vector<const TraceOp*> ops;
  };
  std::map<std::string, Acc> items;
  for (const auto& op : h.ops) {
    if (op.kind != TraceOp::Read && op.kind != TraceOp::Write) continue;
    if (!committed.count(op.txn)) continue;
    items[qualified(h, op)].ops.push_back(&op);
  }
  std::set<std::pair<uint64_t, uint64_t>> have;
  for (auto& [item, acc] : items) {
    for (size_t i = 0; i < acc.ops.size(); ++i)
      for (size_t j = i + 1; j < acc.ops.size(); ++j) {
        const TraceOp* a = acc.ops[i];
        const TraceOp* b = acc.ops[j];
        if (a->txn == b->txn) continue;
        if (a->kind != TraceOp::Write && b->kind != TraceOp::Write) continue;
        if (have.insert({a->txn, b->txn}).second)
          g.edges.push_back({a->txn, b->txn, item});
      }
  }
  return g;
}

bool is_serializable(const History& h) { return build_sg(h).acyclic(); }

bool brute_force_serializable(const History& h) {
  auto committed = committed_txns(h);
  if (committed.size() > 6) throw std::length_error("too-large");
  std::vector<uint64_t> order(committed.begin(), committed.end());

  // Ordered conflicting pairs the serial order must respect.
  SerializationGraph g = build_sg(h);
  std::sort(order.begin(), order.end());
  do {
    std::map<uint64_t, size_t> pos;
    for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    bool ok = true;
    for (const auto& e : g.edges)
      if (pos[e.from] > pos[e.to]) {
        ok = false;
        break;
      }
    if (ok) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return order.empty();
}

History random_history(std::mt19937_64& rng, int max_txns, int max_reactors,
                       int max_items) {
  auto pick = [&](int lo, int hi) {
    return (int)std::uniform_int_distribution<>(lo, hi)(rng);
  };
  int n_txns = pick(1, max_txns);
  int n_reactors = pick(1, max_reactors);

  // Per-txn ordered op list: a few sub-transactions, each on one reactor,
  // each touching distinct items with at most one read and one write per
  // (txn, item) — Bernstein's simplification.
  struct PerTxn {
    std::vector<TraceOp> ops;
  };
  std::vector<PerTxn> txns(n_txns);
  for (int i = 0; i < n_txns; ++i) {
    std::set<std::pair<std::string, int>> read_done, write_done;
    int n_subs = pick(1, 3);
    for (int j = 1; j <= n_subs; ++j) {
      int k = pick(0, n_reactors - 1);
      std::string reactor = "k" + std::to_string(k);
      int n_ops = pick(1, 3);
      for (int o = 0; o < n_ops; ++o) {
        int x = pick(0, max_items - 1);
        bool write = pick(0, 1) == 1;
        auto& done = write ? write_done : read_done;
        if (!done.insert({reactor, x}).second) continue;
        TraceOp op;
        op.kind = write ? TraceOp::Write : TraceOp::Read;
        op.txn = (uint64_t)i + 1;
        op.subtxn = (uint64_t)j;
        op.reactor = reactor;
        op.item = std::string("t") + '\0' + std::to_string(x);
        txns[i].ops.push_back(std::move(op));
      }
    }
    TraceOp t;
    t.kind = pick(0, 9) < 8 ? TraceOp::Commit : TraceOp::Abort;
    t.txn = (uint64_t)i + 1;
    txns[i].ops.push_back(std::move(t));
  }

  // Random fair merge preserving each txn's internal order.
  History h;
  std::vector<size_t> cursor(n_txns, 0);
  size_t remaining = 0;
  for (auto& t : txns) remaining += t.ops.size();
  uint64_t seq = 0;
  while (remaining) {
    int i = pick(0, n_txns - 1);
    if (cursor[i] >= txns[i].ops.size()) continue;
    TraceOp op = txns[i].ops[cursor[i]++];
    op.seq = ++seq;
    h.ops.push_back(std::move(op));
    --remaining;
  }
  return h;
}

ProjectionReport projection_suite(uint64_t seed, size_t n_cases) {
  std::mt19937_64 rng(seed);
  ProjectionReport rep;
  for (size_t i = 0; i < n_cases; ++i) {
    History h = random_history(rng);
    bool reactor_ser = is_serializable(h);
    bool classic_ser = is_serializable(project(h));
    ++rep.cases;
    if (reactor_ser) ++rep.serializable;
    if (reactor_ser != classic_ser) rep.violations.push_back(i);
    if (committed_txns(h).size() <= 6 &&
        brute_force_serializable(h) != reactor_ser)
      rep.oracle_mismatch.push_back(i);
  }
  return rep;
}

}  // namespace reactordb::chk
