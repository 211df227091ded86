#ifndef QSWITCH_DISCOVERY_HPP
#define QSWITCH_DISCOVERY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qswitch/topology.hpp"

namespace qswitch {

/// Local connectivity of one node, flooded network-wide.
struct LinkStateAnnouncement {
  NodeId origin;
  NodeKind origin_kind = NodeKind::EndNode;
  std::uint64_t seq = 0;
  std::vector<Neighbor> adjacency;

  bool operator==(const LinkStateAnnouncement&) const = default;
};

struct BsaTableEntry {
  NodeId bsa;
  PortId bsa_port;
  std::uint32_t cost = 0;  ///< hop count
  NodeId next_hop;

  bool operator==(const BsaTableEntry&) const = default;
};

struct BsaTable {
  NodeId owner;
  /// Sorted by (cost, bsa, bsa_port); one row per reachable BSA input port.
  std::vector<BsaTableEntry> entries;

  const BsaTableEntry* find(NodeId bsa, PortId port) const;
  bool operator==(const BsaTable&) const = default;
};

/// One line per entry: `bsa=<id> port=<p> cost=<c> next_hop=<id>`.
std::string dump_bsa_table(const BsaTable& table);

/// Freshest announcement per origin.
using LinkStateDatabase = std::map<NodeId, LinkStateAnnouncement>;

/**
 * Per-node flooding state. Holds only what the node itself knows: its own
 * adjacency and whatever announcements have reached it.
 */
class DiscoveryAgent {
 public:
  DiscoveryAgent(NodeId self, NodeKind kind, std::vector<Neighbor> adjacency);

  /// First call returns seq 0; each later call increments it.
  LinkStateAnnouncement emit_announcement();

  /// Returns the copies to send on; empty if `lsa` is a duplicate or stale.
  std::vector<std::pair<PortId, LinkStateAnnouncement>> handle_announcement(
      const LinkStateAnnouncement& lsa, PortId arrival_interface);

  const LinkStateDatabase& database() const { return lsdb_; }
  const std::vector<Neighbor>& adjacency() const { return adjacency_; }
  /// Distinct local ports, ascending.
  std::vector<PortId> interfaces() const;

  NodeId self() const { return self_; }
  NodeKind kind() const { return kind_; }

 private:
  NodeId self_;
  NodeKind kind_;
  std::vector<Neighbor> adjacency_;
  std::uint64_t next_seq_ = 0;
  LinkStateDatabase lsdb_;
};

/**
 * Shortest hop-count paths from `owner` to every reachable BSA input port,
 * Dijkstra over a binary heap. Only switches relay; the owner may be any
 * kind. Among equal-cost paths the lexicographically smallest node sequence
 * wins, so next hops are reproducible across runs.
 */
BsaTable compute_bsa_table(const LinkStateDatabase& lsdb, NodeId owner);

/// Convenience: the database a node would hold after complete flooding.
LinkStateDatabase full_database(const Topology& topo);

}  // namespace qswitch

#endif  // QSWITCH_DISCOVERY_HPP
