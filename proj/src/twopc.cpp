#include "reactordb/runtime.hpp"

namespace reactordb::rt {

// Commit protocol for a root transaction. Single-container roots run plain
// OCC validate/install. Multi-container roots do two-phase commit with the
// coordinator inline on the root's worker: phase 1 validates and locks in
// ascending container-id order, phase 2 installs everywhere (or releases
// everything on the first conflict).
void commit_root(RootTxn& root) {
  Database* db = root.db;
  auto states = root.take_states();

  if (root.cc_disabled || states.empty()) {
    if (db->tracer()) db->tracer()->terminal('c', root.id);
    return;
  }

  std::string conflict;
  auto it = states.begin();
  for (; it != states.end(); ++it) {
    if (occ::validate_and_lock(*it->second) == occ::Outcome::Conflict) {
      conflict = it->second->conflict_reason ? it->second->conflict_reason
                                             : "conflict";
      break;
    }
  }
  if (!conflict.empty()) {
    // Validated participants still hold their locks; let everything go.
    for (auto jt = states.begin(); jt != it; ++jt) occ::release(*jt->second);
    occ::release(*it->second);  // no-op locks-wise, marks Aborted
    root.set_abort(conflict);
    if (db->tracer()) db->tracer()->terminal('a', root.id);
    throw TxnAbort(conflict);
  }

  uint64_t epoch = db->epoch();
  for (auto& [cid, st] : states) {
    uint64_t tid = occ::acquire_commit_tid(db->container(cid).last_tid, epoch,
                                           st->max_seen_tid);
    occ::install_and_unlock(*st, tid);
  }
  if (db->tracer()) db->tracer()->terminal('c', root.id);
}

void abort_root(RootTxn& root) {
  auto states = root.take_states();
  for (auto& [cid, st] : states) occ::release(*st);
  if (root.db->tracer()) root.db->tracer()->terminal('a', root.id);
}

}  // namespace reactordb::rt
