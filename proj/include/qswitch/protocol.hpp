#ifndef QSWITCH_PROTOCOL_HPP
#define QSWITCH_PROTOCOL_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qswitch/discovery.hpp"
#include "qswitch/messages.hpp"
#include "qswitch/topology.hpp"

namespace qswitch {

/// What the lead does after a reservation round is rejected.
enum class RejectPolicy {
  NextCandidate,  ///< try the next merged candidate, park once the list is exhausted
  Queue,          ///< park the request right away and restart it after the de-queue delay
};

std::string_view to_string(RejectPolicy p);
RejectPolicy reject_policy_from_string(std::string_view text);

struct ProtocolParams {
  SimTime session_hold = 10;
  SimTime reconfiguration_delay = 0;
  SimTime request_timeout = 10'000;
  SimTime dequeue_delay = 100;
  RejectPolicy reject_policy = RejectPolicy::Queue;
};

class SelfRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class WrongBsa : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A broken protocol or engine invariant. Runs abort on it.
class AssertionFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class TimerKind { TrafficArrival, Resume, SessionHoldEnd };

struct Timer {
  TimerKind kind = TimerKind::TrafficArrival;
  NodeId node;
  SessionId session;
  NodeId peer;  ///< TrafficArrival only
};

struct Delivery {
  Message msg;
  std::optional<PortId> arrival_port;  ///< set for messages sent over a link
};

/**
 * Everything a node may do to the outside world. The engine hands one of
 * these to a node while it processes an event; nodes never see each other.
 */
class NodeContext {
 public:
  virtual ~NodeContext() = default;
  virtual SimTime now() const = 0;
  virtual const ProtocolParams& params() const = 0;
  /// To the neighbor `msg.dst` over local port `via`.
  virtual void send_link(PortId via, Message msg) = 0;
  /// To any node by address.
  virtual void send_addressed(Message msg) = 0;
  virtual void broadcast(NodeId src, const MessageBody& body) = 0;
  virtual void set_timer(SimTime at, Timer timer) = 0;
  virtual void log(std::optional<SessionId> session, std::string_view kind,
                   std::string detail) = 0;
};

// --- resource bookkeeping ------------------------------------------------

/// Identifies one directed path of one reservation round.
struct PathKey {
  SessionId session;
  std::uint32_t attempt = 0;
  NodeId requester;

  auto operator<=>(const PathKey&) const = default;
};

struct PortReservation {
  PortId port;
  PathKey owner;
  SimTime reserved_at = 0;
};

/// What a holder remembers about a path so acks travel back and releases
/// travel forward.
struct PathRecord {
  std::optional<NodeId> upstream;
  std::optional<PortId> in_port;
  std::optional<NodeId> downstream;
  std::optional<PortId> out_port;
};

/// At most one reservation per port, by construction.
class ReservationTable {
 public:
  bool available(PortId port, const PathKey& key) const;
  void reserve(PortId port, const PathKey& key, SimTime now);
  /// Frees every port owned by `key`; returns how many.
  std::size_t release(const PathKey& key);
  std::optional<PathKey> holder(PortId port) const;
  std::size_t count_for(const SessionId& session) const;
  const std::map<PortId, PortReservation>& ports() const { return ports_; }
  bool empty() const { return ports_.empty(); }

 private:
  std::map<PortId, PortReservation> ports_;
};

// --- candidates ----------------------------------------------------------

struct MergedBsaEntry {
  NodeId bsa;
  PortId port_for_lead;
  PortId port_for_peer;
  std::uint32_t combined_cost = 0;

  bool operator==(const MergedBsaEntry&) const = default;
};

/// Every (lead port, peer port) pair on a BSA both tables reach, with
/// distinct ports, sorted by (combined_cost, bsa, port_for_lead).
std::vector<MergedBsaEntry> merge_tables(const BsaTable& lead_table, const BsaTable& peer_table);

// --- sessions ------------------------------------------------------------

enum class Role { Lead, Follower };

enum class SessionState {
  AwaitingPeerTable,
  Selecting,
  AwaitingTargetAck,
  Reserving,
  AwaitingPeerReservation,
  ReservationDone,
  AwaitingStartAck,
  Active,
  Queued,
  Failed,
};

std::string_view to_string(SessionState s);

struct Session {
  SessionId id;
  Role role = Role::Lead;
  NodeId peer;
  SessionState state = SessionState::AwaitingPeerTable;

  std::vector<MergedBsaEntry> candidates;  ///< lead only
  std::size_t current_candidate = 0;       ///< next candidate to pop
  std::uint32_t retries = 0;
  std::uint32_t attempt = 0;
  bool queued = false;

  SimTime created_at = 0;
  std::optional<SimTime> completed_at;
  std::optional<SimTime> dequeued_at;
  SimTime timeout_at = 0;

  // Current reservation round.
  NodeId target_bsa;
  PortId target_port;  ///< this end's BSA input port
  std::uint32_t target_cost = 0;
  bool path_open = false;  ///< own RouteReserveRequest sent and not yet released
  bool own_done = false;
  bool peer_done = false;
  SimTime start_time = 0;
};

// --- nodes ---------------------------------------------------------------

/**
 * Sandboxed node. Holds only local state; all interaction happens through
 * the NodeContext passed to each handler.
 */
class Node {
 public:
  Node(NodeId id, NodeKind kind, std::vector<Neighbor> adjacency);
  virtual ~Node() = default;

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  NodeId id() const { return id_; }
  NodeKind kind() const { return kind_; }

  /// Floods this node's own announcement on every interface.
  void start_discovery(NodeContext& ctx);
  /// Builds the BSA table from whatever the flooding delivered.
  void finish_discovery();

  void handle(const Delivery& d, NodeContext& ctx);
  virtual void on_timer(const Timer& timer, NodeContext& ctx);

  const DiscoveryAgent& discovery() const { return discovery_; }
  const BsaTable& bsa_table() const { return table_; }
  const ReservationTable& reservations() const { return reservations_; }
  const std::map<PathKey, PathRecord>& paths() const { return paths_; }

  /// Out-of-band reservation, used for fault injection in tests.
  void inject_reservation(PortId port, const PathKey& key, SimTime now);
  void clear_injected(const PathKey& key);

 protected:
  virtual void on_message(const Delivery& d, NodeContext& ctx) = 0;

  /// Local port whose outbound channel reaches `next` (and, when `next` is
  /// the BSA, lands on `bsa_port`). Lowest port wins among parallel links.
  std::optional<PortId> out_port_toward(NodeId next, NodeId bsa, PortId bsa_port) const;

  /// Frees the ports of `key` and forwards the release downstream.
  void release_path(const PathKey& key, NodeContext& ctx);

  NodeId id_;
  NodeKind kind_;
  DiscoveryAgent discovery_;
  BsaTable table_;
  ReservationTable reservations_;
  std::map<PathKey, PathRecord> paths_;
};

class EndNode : public Node {
 public:
  using Node::Node;

  /// Starts a link request toward `peer`, or parks it when this node is busy.
  SessionId initiate_request(NodeId peer, NodeContext& ctx);
  void select_and_propose(Session& s, NodeContext& ctx);
  void begin_reservation(Session& s, NodeContext& ctx);
  void handle_reject(Session& s, const RouteReserveReject& rej, NodeContext& ctx);
  void complete_and_schedule(Session& s, NodeContext& ctx);
  void enqueue_request(Session& s, std::string_view reason, NodeContext& ctx);
  /// Picks the earliest parked request still within its timeout and arms
  /// the de-queue delay for it.
  std::optional<SessionId> dequeue_next(NodeContext& ctx);

  void on_timer(const Timer& timer, NodeContext& ctx) override;

  bool busy() const { return engaged_.has_value() || resuming_.has_value(); }
  const std::map<SessionId, Session>& lead_sessions() const { return sessions_; }
  const std::optional<Session>& follower_session() const { return follower_; }
  std::vector<SessionId> queue() const;
  Session* find_session(const SessionId& id);

 protected:
  void on_message(const Delivery& d, NodeContext& ctx) override;

 private:
  void start_activation(Session& s, NodeContext& ctx);
  void set_state(Session& s, SessionState next, NodeContext& ctx);
  void close_own_path(Session& s, NodeContext& ctx);
  void reservation_done(Session& s, NodeContext& ctx);
  void end_session(Session& s, NodeContext& ctx);
  void became_free(NodeContext& ctx);
  void send_to_peer(const Session& s, MessageBody body, NodeContext& ctx);

  void on_request_table(const Message& m, const RequestBsaTable& r, NodeContext& ctx);
  void on_table(const BsaTableResponse& r, NodeContext& ctx);
  void on_target(const TargetSelection& t, NodeContext& ctx);
  void on_target_ack(const TargetAck& a, NodeContext& ctx);
  void on_reserve_ack(const RouteReserveAck& a, NodeContext& ctx);
  void on_reject(const RouteReserveReject& r, NodeContext& ctx);
  void on_release(const ReleaseResources& r, NodeContext& ctx);
  void on_reservation_complete(const ReservationComplete& r, NodeContext& ctx);
  void on_propose(const ProposeStartTime& p, NodeContext& ctx);
  void on_start_ack(const StartTimeAck& a, NodeContext& ctx);
  void on_queued_notice(const RequestQueuedNotice& n, NodeContext& ctx);

  std::map<SessionId, Session> sessions_;  ///< sessions this node leads
  std::optional<Session> follower_;
  std::optional<SessionId> engaged_;   ///< session currently using this node
  std::optional<SessionId> resuming_;  ///< parked session inside its de-queue delay
  std::set<std::pair<SimTime, SessionId>> queue_;
  std::uint32_t next_serial_ = 0;
};

class SwitchNode : public Node {
 public:
  using Node::Node;

  void switch_handle_reserve(const Delivery& d, const RouteReserveRequest& req, NodeContext& ctx);

 protected:
  void on_message(const Delivery& d, NodeContext& ctx) override;
};

class BsaNode : public Node {
 public:
  using Node::Node;

  void bsa_handle_reserve(const Delivery& d, const RouteReserveRequest& req, NodeContext& ctx);
  /// Sessions that held both input ports at once, counted once each.
  std::size_t sessions_served() const { return served_.size(); }

 protected:
  void on_message(const Delivery& d, NodeContext& ctx) override;

 private:
  std::set<SessionId> served_;
};

std::unique_ptr<Node> make_node(const Topology& topo, NodeId id);

}  // namespace qswitch

#endif  // QSWITCH_PROTOCOL_HPP
