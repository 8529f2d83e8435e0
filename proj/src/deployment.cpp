#include "reactordb/deployment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace reactordb::plan {

using nlohmann::json;

namespace {

// Match "prefix<digits>" and extract the index.
bool prefix_index(const std::string& name, const std::string& prefix, long* idx) {
  if (prefix.empty() || name.size() <= prefix.size()) return false;
  if (name.compare(0, prefix.size(), prefix) != 0) return false;
  long v = 0;
  for (size_t i = prefix.size(); i < name.size(); ++i) {
    char c = name[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  *idx = v;
  return true;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end())
      throw PlanError("schema-error", "unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

std::optional<std::pair<int, int>> DeploymentPlan::lookup(
    const std::string& reactor) const {
  for (const auto& e : reactor_map) {
    if (!e.reactor.empty()) {
      if (e.reactor == reactor) return std::make_pair(e.container, e.executor);
    } else {
      long idx;
      if (prefix_index(reactor, e.prefix, &idx) && idx >= e.begin && idx <= e.end)
        return std::make_pair(e.container, e.executor);
    }
  }
  return std::nullopt;
}

bool DeploymentPlan::operator==(const DeploymentPlan& o) const {
  return serialize() == o.serialize();
}

std::string DeploymentPlan::serialize() const {
  json j;
  j["strategy_label"] = strategy_label;
  j["router"] = router == RouterPolicy::RoundRobin ? "round_robin" : "affinity";
  j["containers"] = json::array();
  for (const auto& c : containers) {
    json jc;
    jc["id"] = c.id;
    jc["executors"] = json::array();
    for (const auto& e : c.executors) {
      json je;
      je["id"] = e.id;
      je["mpl"] = e.mpl;
      if (e.core >= 0) je["core"] = e.core;
      jc["executors"].push_back(je);
    }
    j["containers"].push_back(jc);
  }
  j["reactor_map"] = json::array();
  for (const auto& m : reactor_map) {
    json jm;
    if (!m.reactor.empty()) {
      jm["reactor"] = m.reactor;
    } else {
      jm["prefix"] = m.prefix;
      jm["begin"] = m.begin;
      jm["end"] = m.end;
    }
    jm["container"] = m.container;
    if (m.executor >= 0) jm["executor"] = m.executor;
    j["reactor_map"].push_back(jm);
  }
  return j.dump(2);
}

DeploymentPlan parse_plan(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw PlanError("schema-error", e.what());
  }
  reject_unknown(j, {"strategy_label", "router", "containers", "reactor_map"},
                 "plan");

  DeploymentPlan p;
  p.strategy_label = j.value("strategy_label", "");
  std::string r = j.value("router", "affinity");
  if (r == "round_robin")
    p.router = RouterPolicy::RoundRobin;
  else if (r == "affinity")
    p.router = RouterPolicy::Affinity;
  else
    throw PlanError("schema-error", "router must be round_robin or affinity");

  if (!j.contains("containers") || !j["containers"].is_array() ||
      j["containers"].empty())
    throw PlanError("schema-error", "containers array required");

  std::set<int> container_ids;
  std::unordered_map<int, std::set<int>> exec_ids;
  for (const auto& jc : j["containers"]) {
    reject_unknown(jc, {"id", "executors"}, "container");
    ContainerSpec c;
    c.id = jc.at("id").get<int>();
    if (!container_ids.insert(c.id).second)
      throw PlanError("schema-error", "duplicate container id");
    for (const auto& je : jc.at("executors")) {
      reject_unknown(je, {"id", "mpl", "core"}, "executor");
      ExecutorSpec e;
      e.id = je.at("id").get<int>();
      e.mpl = je.value("mpl", 1);
      e.core = je.value("core", -1);
      if (e.mpl < 1) throw PlanError("schema-error", "mpl must be >= 1");
      if (!exec_ids[c.id].insert(e.id).second)
        throw PlanError("schema-error", "duplicate executor id");
      c.executors.push_back(e);
    }
    if (c.executors.empty())
      throw PlanError("schema-error", "container without executors");
    p.containers.push_back(c);
  }

  for (const auto& jm : j.value("reactor_map", json::array())) {
    reject_unknown(jm, {"reactor", "prefix", "begin", "end", "container",
                        "executor"}, "reactor_map entry");
    MapEntry m;
    if (jm.contains("reactor")) {
      m.reactor = jm["reactor"].get<std::string>();
    } else {
      m.prefix = jm.at("prefix").get<std::string>();
      m.begin = jm.at("begin").get<long>();
      m.end = jm.at("end").get<long>();
      if (m.begin > m.end) throw PlanError("schema-error", "begin > end");
    }
    m.container = jm.at("container").get<int>();
    m.executor = jm.value("executor", -1);
    if (!container_ids.count(m.container))
      throw PlanError("schema-error", "map entry references unknown container");
    if (m.executor >= 0 && !exec_ids[m.container].count(m.executor))
      throw PlanError("dangling-executor",
                      "executor " + std::to_string(m.executor) +
                          " not in container " + std::to_string(m.container));
    p.reactor_map.push_back(m);
  }

  // Double-mapping: exact names against everything, ranges against same-prefix
  // ranges.
  for (size_t a = 0; a < p.reactor_map.size(); ++a) {
    for (size_t b = a + 1; b < p.reactor_map.size(); ++b) {
      const auto& x = p.reactor_map[a];
      const auto& y = p.reactor_map[b];
      bool clash = false;
      if (!x.reactor.empty() && !y.reactor.empty()) {
        clash = x.reactor == y.reactor;
      } else if (x.reactor.empty() && y.reactor.empty()) {
        clash = x.prefix == y.prefix && x.begin <= y.end && y.begin <= x.end;
      } else {
        const auto& exact = x.reactor.empty() ? y : x;
        const auto& range = x.reactor.empty() ? x : y;
        long idx;
        clash = prefix_index(exact.reactor, range.prefix, &idx) &&
                idx >= range.begin && idx <= range.end;
      }
      if (clash) throw PlanError("double-mapping", "overlapping reactor_map entries");
    }
  }
  return p;
}

DeploymentPlan parse_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PlanError("schema-error", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str());
}

namespace {

// Common case: names are "prefix<i>" with contiguous indexes. Lets the map
// use compact range entries instead of one exact entry per reactor.
bool uniform_prefix(const std::vector<std::string>& names, std::string* prefix,
                    long* first) {
  if (names.empty()) return false;
  size_t digits = 0;
  const std::string& n0 = names[0];
  while (digits < n0.size() && isdigit((unsigned char)n0[n0.size() - 1 - digits]))
    ++digits;
  if (digits == 0) return false;
  *prefix = n0.substr(0, n0.size() - digits);
  long idx0;
  if (!prefix_index(n0, *prefix, &idx0)) return false;
  for (size_t i = 1; i < names.size(); ++i) {
    long idx;
    if (!prefix_index(names[i], *prefix, &idx) || idx != idx0 + long(i))
      return false;
  }
  *first = idx0;
  return true;
}

}  // namespace

DeploymentPlan build_strategy(Strategy s, int n_executors,
                              const std::vector<std::string>& reactor_names,
                              int s3_mpl) {
  DeploymentPlan p;
  long n = long(reactor_names.size());
  std::string prefix;
  long first = 0;
  bool ranged = uniform_prefix(reactor_names, &prefix, &first);

  auto map_to = [&](long i, int container, int executor) {
    MapEntry m;
    m.reactor = reactor_names[i];
    m.container = container;
    m.executor = executor;
    p.reactor_map.push_back(m);
  };

  if (s == Strategy::S1 || s == Strategy::S2) {
    ContainerSpec c;
    c.id = 0;
    for (int i = 0; i < n_executors; ++i) c.executors.push_back({i, 1, -1});
    p.containers.push_back(c);
    p.router = s == Strategy::S1 ? RouterPolicy::RoundRobin : RouterPolicy::Affinity;
    p.strategy_label = s == Strategy::S1 ? "s1" : "s2";
    if (s == Strategy::S1 && ranged) {
      MapEntry m;
      m.prefix = prefix;
      m.begin = first;
      m.end = first + n - 1;
      m.container = 0;
      p.reactor_map.push_back(m);
    } else if (s == Strategy::S2 && ranged) {
      // Contiguous reactor ranges per executor (total affinity function).
      long chunk = (n + n_executors - 1) / n_executors;
      for (int ei = 0; ei < n_executors; ++ei) {
        long lo = ei * chunk, hi = std::min(n, lo + chunk) - 1;
        if (lo > hi) continue;
        MapEntry m;
        m.prefix = prefix;
        m.begin = first + lo;
        m.end = first + hi;
        m.container = 0;
        m.executor = ei;
        p.reactor_map.push_back(m);
      }
    } else {
      // S2 needs a total reactor -> executor function.
      for (long i = 0; i < n; ++i)
        map_to(i, 0, s == Strategy::S2 ? int(i % n_executors) : -1);
    }
  } else {
    p.router = RouterPolicy::Affinity;
    p.strategy_label = "s3";
    for (int i = 0; i < n_executors; ++i) {
      ContainerSpec c;
      c.id = i;
      c.executors.push_back({0, s3_mpl, -1});
      p.containers.push_back(c);
    }
    long chunk = (n + n_executors - 1) / n_executors;
    if (ranged) {
      for (int ci = 0; ci < n_executors; ++ci) {
        long lo = ci * chunk, hi = std::min(n, lo + chunk) - 1;
        if (lo > hi) continue;
        MapEntry m;
        m.prefix = prefix;
        m.begin = first + lo;
        m.end = first + hi;
        m.container = ci;
        m.executor = 0;
        p.reactor_map.push_back(m);
      }
    } else {
      for (long i = 0; i < n; ++i) map_to(i, int(i / chunk), 0);
    }
  }
  return p;
}

}  // namespace reactordb::plan
