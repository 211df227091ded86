#ifndef QSWITCH_TYPES_HPP
#define QSWITCH_TYPES_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qswitch {

/**
 * Thin integer wrapper so node ids and port ids cannot be mixed up.
 */
template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  constexpr auto operator<=>(const StrongId&) const = default;
};

struct NodeIdTag {};
struct PortIdTag {};

using NodeId = StrongId<NodeIdTag>;
using PortId = StrongId<PortIdTag>;

template <typename Tag>
std::ostream& operator<<(std::ostream& os, StrongId<Tag> id) {
  return os << id.value;
}

/// Simulation clock, in integer time steps.
using SimTime = std::int64_t;

enum class NodeKind { EndNode, Switch, Bsa };

std::string_view to_string(NodeKind kind);
/// Accepts the file-format spellings `endnode`, `switch`, `bsa`.
NodeKind node_kind_from_string(std::string_view text);

struct SessionId {
  NodeId lead;
  std::uint32_t serial = 0;

  auto operator<=>(const SessionId&) const = default;
};

std::string to_string(const SessionId& id);

inline std::ostream& operator<<(std::ostream& os, const SessionId& id) {
  return os << to_string(id);
}

class UnknownNode : public std::out_of_range {
 public:
  explicit UnknownNode(NodeId id)
      : std::out_of_range("unknown node " + std::to_string(id.value)), node(id) {}
  NodeId node;
};

}  // namespace qswitch

template <typename Tag>
struct std::hash<qswitch::StrongId<Tag>> {
  std::size_t operator()(qswitch::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};

#endif  // QSWITCH_TYPES_HPP
