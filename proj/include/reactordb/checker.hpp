#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace reactordb::chk {

struct TraceOp {
  enum Kind { Read, Write, Commit, Abort } kind;
  uint64_t seq = 0;
  uint64_t txn = 0;
  uint64_t subtxn = 0;     // reads/writes only
  std::string reactor;     // reads/writes only
  std::string item;        // "table\0key" (reads/writes only)
};

enum class Model { Reactor, Classic };

// A totally ordered history; `seq` is the order. Reactor-model histories
// name items per reactor; classic histories carry fully-qualified items.
struct History {
  std::vector<TraceOp> ops;
  Model model = Model::Reactor;
};

// Parses the engine trace format:
//   seq txn subtxn reactor table hexkey {r|w}
//   seq txn {c|a}
History parse_trace(std::istream& in);
History parse_trace_file(const std::string& path);

// Unroll sub-transactions into a classic history; every item x on reactor
// k becomes the named item k∘x, all ordering constraints preserved.
History project(const History& h);

struct SerializationGraph {
  std::vector<uint64_t> nodes;  // committed txns
  struct Edge {
    uint64_t from, to;
    std::string witness;  // item of the first conflicting pair seen
  };
  std::vector<Edge> edges;
  bool acyclic() const;
};

SerializationGraph build_sg(const History& h);
bool is_serializable(const History& h);

// Exhaustive serial-order search; throws std::length_error("too-large")
// past 6 committed transactions.
bool brute_force_serializable(const History& h);

// Randomized check of projection equivalence:
// a reactor-model history is serializable iff its projection is.
struct ProjectionReport {
  size_t cases = 0;
  size_t serializable = 0;
  std::vector<size_t> violations;  // case indexes; must stay empty
  std::vector<size_t> oracle_mismatch;  // brute-force disagreements
};

History random_history(std::mt19937_64& rng, int max_txns = 5,
                       int max_reactors = 3, int max_items = 4);
ProjectionReport projection_suite(uint64_t seed, size_t n_cases);

}  // namespace reactordb::chk
