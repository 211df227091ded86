#ifndef QSWITCH_TOPOLOGY_HPP
#define QSWITCH_TOPOLOGY_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qswitch/types.hpp"

namespace qswitch {

struct Endpoint {
  NodeId node;
  PortId port;

  auto operator<=>(const Endpoint&) const = default;
};

/// One directed channel: a flying qubit leaves `from` and enters `to`.
struct Channel {
  Endpoint from;
  Endpoint to;

  auto operator<=>(const Channel&) const = default;
};

enum class Direction { Out, In, Both };

std::string_view to_string(Direction d);

/// Adjacency entry as seen from one node.
struct Neighbor {
  NodeId node;
  PortId local_port;
  PortId remote_port;
  Direction direction = Direction::Both;

  bool operator==(const Neighbor&) const = default;
};

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string reason);

  std::size_t line;
  std::size_t column;
  std::string reason;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  std::vector<std::string> violations;
};

/**
 * Directed multigraph of end nodes, switches and BSAs with port-level
 * channel endpoints. Built once, then treated as read-only.
 */
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::string name) : name_(std::move(name)) {}

  void add_node(NodeId id, NodeKind kind);
  void add_channel(Endpoint from, Endpoint to);

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  const std::map<NodeId, NodeKind>& nodes() const { return nodes_; }
  /// Sorted by (from, to).
  const std::vector<Channel>& channels() const { return channels_; }

  bool contains(NodeId id) const { return nodes_.contains(id); }
  NodeKind kind(NodeId id) const;
  std::size_t count(NodeKind kind) const;
  std::vector<NodeId> nodes_of(NodeKind kind) const;

  /// Ordered by neighbor id, then local port. A port pair carrying a
  /// channel in each direction is reported once with Direction::Both.
  std::vector<Neighbor> neighbors(NodeId id) const;

  std::optional<Channel> outbound(Endpoint at) const;
  std::optional<Channel> inbound(Endpoint at) const;

  /// Hard invariant violations; empty when the topology is usable.
  std::vector<std::string> violations() const;
  /// Soft issues (disconnected components).
  std::vector<std::string> warnings() const;
  /// Throws ValidationError listing every violation.
  void validate() const;

  bool operator==(const Topology&) const = default;

 private:
  std::string name_;
  std::map<NodeId, NodeKind> nodes_;
  std::vector<Channel> channels_;
};

struct QFlyParams {
  unsigned g = 1;  ///< groups
  unsigned p = 1;  ///< end nodes per group
  unsigned b = 1;  ///< BSAs per group
  unsigned k = 0;  ///< group switch radix, informational
  std::optional<unsigned> n_override;
  std::string label = "QFLY";

  static QFlyParams sphd20();
  static QFlyParams dphd42();
};

/// Radix mismatches and similar non-fatal observations.
std::vector<std::string> qfly_warnings(const QFlyParams& params);

/**
 * Group switches are fully meshed; every end node and both input ports of
 * every BSA attach to their group switch. Ids: switches, then BSAs group by
 * group, then end nodes group by group.
 */
Topology generate_qfly(const QFlyParams& params);

/// End nodes per group after applying n_override (earlier groups larger).
std::vector<unsigned> qfly_group_sizes(const QFlyParams& params);

Topology load_topology(std::string_view text);
Topology load_topology_file(const std::string& path);
std::string serialize_topology(const Topology& topo);

}  // namespace qswitch

#endif  // QSWITCH_TOPOLOGY_HPP
