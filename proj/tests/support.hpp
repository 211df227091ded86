// Shared test helpers: independent oracles, random topologies and the
// property checks used by both the unit suite and the acceptance runner.
#ifndef QSWITCH_TESTS_SUPPORT_HPP
#define QSWITCH_TESTS_SUPPORT_HPP

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qswitch/analytics.hpp"
#include "qswitch/engine.hpp"
#include "qswitch/topology.hpp"

namespace qswitch::testing {

inline std::string data_path(const std::string& name) { return std::string(QSWITCH_TEST_DATA) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// QC2 = 0, QC4 = 1, S1 = 2, S2 = 3, BSA = 4.
inline Topology fig5() { return load_topology_file(data_path("fig5.topo")); }

inline constexpr NodeId kQC2{0}, kQC4{1}, kS1{2}, kS2{3}, kBsa{4};

/// Hop distance from `owner` to every BSA input port over directed
/// channels, relaying only through switches. Plain BFS, no shared code with
/// the library's path computation.
inline std::map<std::pair<NodeId, PortId>, std::uint32_t> bfs_bsa_costs(const Topology& topo, NodeId owner) {
  std::map<NodeId, std::uint32_t> dist{{owner, 0}};
  std::deque<NodeId> todo{owner};
  while (!todo.empty()) {
    NodeId u = todo.front();
    todo.pop_front();
    if (u != owner && topo.kind(u) != NodeKind::Switch) continue;
    for (const auto& c : topo.channels()) {
      if (c.from.node != u || dist.contains(c.to.node)) continue;
      dist[c.to.node] = dist[u] + 1;
      todo.push_back(c.to.node);
    }
  }
  std::map<std::pair<NodeId, PortId>, std::uint32_t> out;
  for (const auto& c : topo.channels()) {
    if (topo.kind(c.to.node) != NodeKind::Bsa || c.to.node == owner) continue;
    const NodeId from = c.from.node;
    if (from != owner && topo.kind(from) != NodeKind::Switch) continue;
    auto d = dist.find(from);
    if (d == dist.end()) continue;
    auto key = std::pair{c.to.node, c.to.port};
    auto cost = d->second + 1;
    auto it = out.find(key);
    if (it == out.end() || cost < it->second) out[key] = cost;
  }
  return out;
}

/// Random connected topology: end nodes and switches joined by a random
/// spanning tree plus extra bidirectional links, each BSA fed by two
/// distinct non-BSA nodes.
inline Topology random_topology(std::uint64_t seed, unsigned max_nodes = 50) {
  std::mt19937_64 rng(seed);
  auto pick = [&](unsigned lo, unsigned hi) { return std::uniform_int_distribution<unsigned>(lo, hi)(rng); };
  const unsigned n = pick(6, max_nodes);
  const unsigned bsas = pick(1, std::max(1u, n / 5));
  const unsigned ends = pick(2, std::max(2u, (n - bsas) / 2));
  const unsigned switches = n - bsas - ends;

  Topology t("RANDOM-" + std::to_string(seed));
  std::vector<NodeId> core;
  unsigned id = 0;
  for (unsigned i = 0; i < switches; ++i, ++id) {
    t.add_node(NodeId{id}, NodeKind::Switch);
    core.push_back(NodeId{id});
  }
  for (unsigned i = 0; i < ends; ++i, ++id) {
    t.add_node(NodeId{id}, NodeKind::EndNode);
    core.push_back(NodeId{id});
  }
  std::vector<NodeId> bsa_ids;
  for (unsigned i = 0; i < bsas; ++i, ++id) {
    t.add_node(NodeId{id}, NodeKind::Bsa);
    bsa_ids.push_back(NodeId{id});
  }
  std::shuffle(core.begin(), core.end(), rng);
  std::map<NodeId, unsigned> next_port;
  auto link = [&](NodeId a, NodeId b) {
    PortId pa{next_port[a]++}, pb{next_port[b]++};
    t.add_channel({a, pa}, {b, pb});
    t.add_channel({b, pb}, {a, pa});
  };
  for (std::size_t i = 1; i < core.size(); ++i) link(core[i], core[pick(0, static_cast<unsigned>(i - 1))]);
  const unsigned extra = pick(0, static_cast<unsigned>(core.size()));
  for (unsigned e = 0; e < extra; ++e) {
    auto a = core[pick(0, static_cast<unsigned>(core.size() - 1))];
    auto b = core[pick(0, static_cast<unsigned>(core.size() - 1))];
    if (a != b) link(a, b);
  }
  for (NodeId b : bsa_ids) {
    auto x = core[pick(0, static_cast<unsigned>(core.size() - 1))];
    NodeId y = x;
    while (y == x) y = core[pick(0, static_cast<unsigned>(core.size() - 1))];
    for (auto [from, port] : {std::pair{x, 0u}, std::pair{y, 1u}}) {
      t.add_channel({from, PortId{next_port[from]++}}, {b, PortId{port}});
    }
  }
  return t;
}

/// Empty when every table at every node of `topo` matches the oracle and
/// every merged candidate cost is the sum of the two oracle distances.
inline std::vector<std::string> oracle_mismatches(const Topology& topo) {
  std::vector<std::string> out;
  auto db = full_database(topo);
  std::map<NodeId, BsaTable> tables;
  for (const auto& [id, kind] : topo.nodes()) {
    if (kind == NodeKind::Bsa) continue;
    tables[id] = compute_bsa_table(db, id);
    auto oracle = bfs_bsa_costs(topo, id);
    if (tables[id].entries.size() != oracle.size()) {
      out.push_back(topo.name() + ": node " + std::to_string(id.value) + " has " +
                    std::to_string(tables[id].entries.size()) + " entries, oracle " + std::to_string(oracle.size()));
      continue;
    }
    for (const auto& e : tables[id].entries) {
      auto it = oracle.find({e.bsa, e.bsa_port});
      if (it == oracle.end() || it->second != e.cost) {
        out.push_back(topo.name() + ": node " + std::to_string(id.value) + " bsa " + std::to_string(e.bsa.value) +
                      ":" + std::to_string(e.bsa_port.value) + " cost " + std::to_string(e.cost));
      }
    }
  }
  auto ends = topo.nodes_of(NodeKind::EndNode);
  for (NodeId a : ends) {
    for (NodeId b : ends) {
      if (a == b) continue;
      auto oa = bfs_bsa_costs(topo, a), ob = bfs_bsa_costs(topo, b);
      for (const auto& m : merge_tables(tables[a], tables[b])) {
        if (m.combined_cost != oa.at({m.bsa, m.port_for_lead}) + ob.at({m.bsa, m.port_for_peer})) {
          out.push_back(topo.name() + ": merged cost mismatch for " + std::to_string(a.value) + "," +
                        std::to_string(b.value));
        }
      }
    }
  }
  return out;
}

/// Path consistency at the moment each session turns active: two
/// port-disjoint paths, one per end node, into distinct ports of one BSA,
/// each as long as the owner's table cost. Returns violations.
inline std::vector<std::string> run_with_path_checks(Engine& engine, SimTime limit) {
  std::vector<std::string> out;
  std::size_t seen = engine.log().size();
  while (engine.step(limit)) {
    const auto& recs = engine.log().records();
    for (; seen < recs.size(); ++seen) {
      const auto& r = recs[seen];
      if (r.kind != log_kind::kActive || !r.session || r.node != r.session->lead) continue;
      const auto& lead = engine.end_node(r.node);
      const Session& s = lead.lead_sessions().at(*r.session);
      auto paths = engine.reserved_paths(s.id, s.attempt);
      const std::string tag = "session " + to_string(s.id);
      if (paths.size() != 2) {
        out.push_back(tag + ": " + std::to_string(paths.size()) + " paths");
        continue;
      }
      std::set<std::pair<NodeId, PortId>> used;
      std::set<NodeId> starts;
      std::set<PortId> bsa_ports;
      std::set<NodeId> bsas;
      for (const auto& p : paths) {
        if (p.size() < 2 || p.size() % 2) {
          out.push_back(tag + ": malformed path");
          continue;
        }
        const NodeId start = p.front().node;
        starts.insert(start);
        bsas.insert(p.back().node);
        bsa_ports.insert(p.back().port);
        if (engine.topology().kind(p.back().node) != NodeKind::Bsa) out.push_back(tag + ": path ends off a BSA");
        for (const auto& ep : p) {
          if (!used.insert({ep.node, ep.port}).second) out.push_back(tag + ": paths share a port");
        }
        const auto* entry = engine.node(start).bsa_table().find(p.back().node, p.back().port);
        if (!entry || entry->cost != p.size() / 2) out.push_back(tag + ": path length differs from table cost");
      }
      if (starts != std::set<NodeId>{s.id.lead, s.peer}) out.push_back(tag + ": wrong path origins");
      if (bsas.size() != 1 || bsa_ports.size() != 2) out.push_back(tag + ": paths do not meet at one BSA");
    }
  }
  return out;
}

inline SimConfig preset_config(const std::string& name, double lambda, std::uint64_t seed) {
  SimConfig c;
  c.topology = name == "dphd42" ? QFlyParams::dphd42() : QFlyParams::sphd20();
  c.lambda = lambda;
  c.seed = seed;
  c.log_messages = false;
  return c;
}

}  // namespace qswitch::testing

#endif  // QSWITCH_TESTS_SUPPORT_HPP
