#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <stdexcept>

namespace reactordb::plan {

enum class RouterPolicy { RoundRobin, Affinity };

struct ExecutorSpec {
  int id = 0;
  int mpl = 1;
  int core = -1;  // -1: unpinned
};

struct ContainerSpec {
  int id = 0;
  std::vector<ExecutorSpec> executors;
};

// Either an exact reactor name, or prefix + [begin, end] index range
// (reactor "c42" matches prefix "c", index 42).
struct MapEntry {
  std::string reactor;
  std::string prefix;
  long begin = -1, end = -1;
  int container = 0;
  int executor = -1;  // affinity hint; -1 when unset
};

class PlanError : public std::runtime_error {
 public:
  PlanError(const std::string& kind, const std::string& detail)
      : std::runtime_error(kind + ": " + detail), kind(kind) {}
  std::string kind;
};

struct DeploymentPlan {
  std::vector<ContainerSpec> containers;
  std::vector<MapEntry> reactor_map;
  RouterPolicy router = RouterPolicy::Affinity;
  std::string strategy_label;

  // (container id, executor id or -1); nullopt when unmapped.
  std::optional<std::pair<int, int>> lookup(const std::string& reactor) const;

  std::string serialize() const;

  bool operator==(const DeploymentPlan&) const;
};

DeploymentPlan parse_plan(const std::string& json_text);
DeploymentPlan parse_plan_file(const std::string& path);

enum class Strategy { S1, S2, S3 };

// Canned deployment strategies: s1 = one container, round-robin; s2 = one
// container, affinity; s3 = one container per executor, range-partitioned.
DeploymentPlan build_strategy(Strategy s, int n_executors,
                              const std::vector<std::string>& reactor_names,
                              int s3_mpl = 4);

}  // namespace reactordb::plan
