#ifndef QSWITCH_MESSAGES_HPP
#define QSWITCH_MESSAGES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "qswitch/discovery.hpp"
#include "qswitch/types.hpp"

namespace qswitch {

// Control-plane messages of the link setup handshake. `attempt` numbers
// reservation rounds within one session so late replies from an abandoned
// round are recognisable.

struct RequestBsaTable {
  SessionId session;
};

struct BsaTableResponse {
  SessionId session;
  BsaTable table;
};

struct TargetSelection {
  SessionId session;
  std::uint32_t attempt = 0;
  NodeId bsa;
  PortId port_for_receiver;
  std::uint32_t candidate_rank = 0;
};

struct TargetAck {
  SessionId session;
  std::uint32_t attempt = 0;
};

struct RouteReserveRequest {
  SessionId session;
  std::uint32_t attempt = 0;
  NodeId bsa;
  PortId bsa_port;
  NodeId requester;
};

struct RouteReserveAck {
  SessionId session;
  std::uint32_t attempt = 0;
  NodeId requester;
};

struct RouteReserveReject {
  SessionId session;
  std::uint32_t attempt = 0;
  NodeId requester;
  NodeId rejecting_node;
};

/// Hop-by-hop along a reserved path (switches, BSA), or end to end as the
/// "free your path" notice between the two end nodes.
struct ReleaseResources {
  SessionId session;
  std::uint32_t attempt = 0;
  NodeId requester;
};

struct ReservationComplete {
  SessionId session;
  std::uint32_t attempt = 0;
};

struct ProposeStartTime {
  SessionId session;
  std::uint32_t attempt = 0;
  SimTime start_time = 0;
};

struct StartTimeAck {
  SessionId session;
  std::uint32_t attempt = 0;
};

/// Sent by a busy follower, or by a lead that parked the request.
struct RequestQueuedNotice {
  SessionId session;
};

using MessageBody =
    std::variant<LinkStateAnnouncement, RequestBsaTable, BsaTableResponse, TargetSelection,
                 TargetAck, RouteReserveRequest, RouteReserveAck, RouteReserveReject,
                 ReleaseResources, ReservationComplete, ProposeStartTime, StartTimeAck,
                 RequestQueuedNotice>;

struct Message {
  NodeId src;
  NodeId dst;
  MessageBody body;
};

std::string_view kind_name(const MessageBody& body);
std::optional<SessionId> session_of(const MessageBody& body);
/// Compact single-line rendering used in the event log.
std::string describe(const Message& msg);

}  // namespace qswitch

#endif  // QSWITCH_MESSAGES_HPP
