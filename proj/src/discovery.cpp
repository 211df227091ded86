#include "qswitch/discovery.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

namespace qswitch {

const BsaTableEntry* BsaTable::find(NodeId bsa, PortId port) const {
  for (const auto& e : entries) {
    if (e.bsa == bsa && e.bsa_port == port) return &e;
  }
  return nullptr;
}

std::string dump_bsa_table(const BsaTable& table) {
  std::ostringstream out;
  for (const auto& e : table.entries) {
    out << "bsa=" << e.bsa << " port=" << e.bsa_port << " cost=" << e.cost
        << " next_hop=" << e.next_hop << "\n";
  }
  return out.str();
}

DiscoveryAgent::DiscoveryAgent(NodeId self, NodeKind kind, std::vector<Neighbor> adjacency)
    : self_(self), kind_(kind), adjacency_(std::move(adjacency)) {}

LinkStateAnnouncement DiscoveryAgent::emit_announcement() {
  LinkStateAnnouncement lsa{self_, kind_, next_seq_++, adjacency_};
  lsdb_[self_] = lsa;
  return lsa;
}

std::vector<PortId> DiscoveryAgent::interfaces() const {
  std::set<PortId> ports;
  for (const auto& n : adjacency_) ports.insert(n.local_port);
  return {ports.begin(), ports.end()};
}

std::vector<std::pair<PortId, LinkStateAnnouncement>> DiscoveryAgent::handle_announcement(
    const LinkStateAnnouncement& lsa, PortId arrival_interface) {
  auto it = lsdb_.find(lsa.origin);
  if (it != lsdb_.end() && it->second.seq >= lsa.seq) return {};
  lsdb_[lsa.origin] = lsa;

  std::vector<std::pair<PortId, LinkStateAnnouncement>> out;
  for (PortId port : interfaces()) {
    if (port != arrival_interface) out.emplace_back(port, lsa);
  }
  return out;
}

namespace {

struct Edge {
  NodeId from;
  NodeId to;
  PortId to_port;

  auto operator<=>(const Edge&) const = default;
};

}  // namespace

BsaTable compute_bsa_table(const LinkStateDatabase& lsdb, NodeId owner) {
  std::set<Edge> edges;
  std::map<NodeId, NodeKind> kinds;
  for (const auto& [origin, lsa] : lsdb) {
    kinds[origin] = lsa.origin_kind;
    for (const auto& n : lsa.adjacency) {
      if (n.direction != Direction::In) edges.insert({origin, n.node, n.remote_port});
      if (n.direction != Direction::Out) edges.insert({n.node, origin, n.local_port});
    }
  }
  std::map<NodeId, std::vector<const Edge*>> out_edges;
  for (const auto& e : edges) out_edges[e.from].push_back(&e);

  auto relays = [&](NodeId n) {
    if (n == owner) return true;
    auto k = kinds.find(n);
    return k != kinds.end() && k->second == NodeKind::Switch;
  };

  // Label = (hops, node sequence). Sub-paths of lexicographically smallest
  // shortest paths are themselves smallest, so Dijkstra on the pair is exact.
  using Label = std::pair<std::uint32_t, std::vector<NodeId>>;
  std::map<NodeId, Label> best;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  best[owner] = {0, {owner}};
  heap.push(best[owner]);
  while (!heap.empty()) {
    Label cur = heap.top();
    heap.pop();
    const NodeId u = cur.second.back();
    if (best[u] != cur) continue;
    if (!relays(u)) continue;
    for (const Edge* e : out_edges[u]) {
      Label cand{cur.first + 1, cur.second};
      cand.second.push_back(e->to);
      auto it = best.find(e->to);
      if (it == best.end() || cand < it->second) {
        best[e->to] = cand;
        heap.push(std::move(cand));
      }
    }
  }

  std::map<std::pair<NodeId, PortId>, Label> to_ports;
  for (const auto& e : edges) {
    auto k = kinds.find(e.to);
    if (k == kinds.end() || k->second != NodeKind::Bsa || e.to == owner) continue;
    auto from = best.find(e.from);
    if (from == best.end() || !relays(e.from)) continue;
    Label cand{from->second.first + 1, from->second.second};
    cand.second.push_back(e.to);
    auto key = std::pair{e.to, e.to_port};
    auto it = to_ports.find(key);
    if (it == to_ports.end() || cand < it->second) to_ports[key] = std::move(cand);
  }

  BsaTable table{owner, {}};
  for (const auto& [key, label] : to_ports) {
    table.entries.push_back({key.first, key.second, label.first, label.second.at(1)});
  }
  std::sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.cost, a.bsa, a.bsa_port) < std::tie(b.cost, b.bsa, b.bsa_port);
  });
  return table;
}

LinkStateDatabase full_database(const Topology& topo) {
  LinkStateDatabase db;
  for (const auto& [id, kind] : topo.nodes()) {
    db[id] = LinkStateAnnouncement{id, kind, 0, topo.neighbors(id)};
  }
  return db;
}

}  // namespace qswitch
