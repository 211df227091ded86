#ifndef QSWITCH_ENGINE_HPP
#define QSWITCH_ENGINE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qswitch/event_log.hpp"
#include "qswitch/protocol.hpp"
#include "qswitch/topology.hpp"
#include "qswitch/traffic.hpp"

namespace qswitch {

class PastEvent : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Unreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeadlockDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How messages sent by address (end node to end node) are delayed.
enum class AddressedDelivery {
  Direct,  ///< the scheduler hands the message to the recipient after one hop_latency
  Routed,  ///< hop_latency per classical hop on the shortest path
};

std::string_view to_string(AddressedDelivery d);
AddressedDelivery addressed_delivery_from_string(std::string_view text);

struct Deliver {
  Message msg;
  std::optional<PortId> arrival_port;
};

struct TimerFire {
  Timer timer;
};

struct Event {
  SimTime fire_at = 0;
  std::uint64_t seq = 0;  ///< assigned by the engine
  std::variant<Deliver, TimerFire> payload;
};

/// Hop distances over the undirected classical graph (same adjacency as
/// the quantum channels).
class ClassicalRoutes {
 public:
  explicit ClassicalRoutes(const Topology& topo);
  /// Throws Unreachable.
  std::uint32_t hops(NodeId src, NodeId dst) const;

 private:
  std::map<NodeId, std::map<NodeId, std::uint32_t>> dist_;
};

/// hop_latency x classical hop count between src and dst.
SimTime route_classical(const Topology& topo, const Message& msg, SimTime hop_latency);

struct EngineOptions {
  SimTime hop_latency = 1;
  AddressedDelivery addressed = AddressedDelivery::Direct;
  ProtocolParams protocol;
  bool audit = true;          ///< reservation sweep after every event
  bool log_messages = true;   ///< send/recv records in the event log
};

/**
 * Single-threaded discrete-event scheduler. Owns every node; nodes only
 * ever see the NodeContext of the event being processed.
 */
class Engine {
 public:
  Engine(const Topology& topo, EngineOptions options);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  SimTime now() const { return now_; }
  const Topology& topology() const { return topo_; }
  const EngineOptions& options() const { return options_; }

  /// Throws PastEvent when fire_at is before the clock.
  void schedule(Event event);
  void schedule_timer(SimTime at, Timer timer);

  /// Processes the next event if its time is <= limit.
  bool step(SimTime limit);
  /// Returns number of events processed.
  std::size_t run_until(SimTime limit);
  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }

  /// Floods announcements from every node, runs to quiescence and builds
  /// every BSA table. Returns the number of announcement messages sent.
  std::uint64_t run_discovery();

  /// Sends `body` from `src` to every other node, as a node would.
  void broadcast(NodeId src, const MessageBody& body);

  /// Drops all traffic to and from `id`.
  void isolate(NodeId id) { isolated_.insert(id); }

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  EndNode& end_node(NodeId id);
  std::vector<NodeId> node_ids() const;

  EventLog& log() { return log_; }
  const EventLog& log() const { return log_; }

  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t deliveries() const { return deliveries_; }

  /// Reservation consistency problems; empty when healthy.
  std::vector<std::string> audit() const;
  /// Sessions still open at some lead (queued, resuming or in flight).
  std::size_t open_sessions() const;
  std::size_t total_reservations() const;

  /// Links in use by one round, for path-consistency checks. Each path is
  /// the node sequence from the requesting end node to the BSA.
  std::vector<std::vector<Endpoint>> reserved_paths(const SessionId& session, std::uint32_t attempt) const;

 private:
  class Context;
  friend class Context;

  void deliver_link(NodeId src, PortId via, Message msg);
  void deliver_addressed(Message msg);
  void record(SimTime t, NodeId node, std::optional<SessionId> session, std::string_view kind,
              std::string detail);

  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.fire_at != b.fire_at ? a.fire_at > b.fire_at : a.seq > b.seq;
    }
  };

  Topology topo_;
  EngineOptions options_;
  ClassicalRoutes routes_;
  std::map<NodeId, std::unique_ptr<Node>> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::set<NodeId> isolated_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t deliveries_ = 0;
  EventLog log_;
};

struct SimConfig {
  std::variant<QFlyParams, Topology> topology = QFlyParams::sphd20();
  double lambda = 100.0;
  SimTime horizon = 10'000;
  std::uint64_t seed = 1;
  SimTime hop_latency = 1;
  SimTime grace = 50'000;  ///< post-horizon drain
  AddressedDelivery addressed = AddressedDelivery::Direct;
  ProtocolParams protocol;
  bool audit = true;
  bool log_messages = true;

  /// Throws std::invalid_argument.
  void validate() const;
  Topology build_topology() const;
};

struct RunResult {
  std::string topology_name;
  EventLog log;
  std::vector<TrafficRequest> requests;
  std::uint64_t discovery_messages = 0;
  std::size_t node_count = 0;
  std::size_t channel_count = 0;
  SimTime traffic_epoch = 0;  ///< clock value when traffic injection began
  SimTime end_time = 0;
  std::size_t unresolved = 0;  ///< sessions still open when the drain limit hit
};

/**
 * Discovery, then traffic until horizon plus grace. Throws DeadlockDetected
 * if sessions remain open with nothing left to process, AssertionFailure
 * when an audit fails.
 */
RunResult run(const SimConfig& config);

}  // namespace qswitch

#endif  // QSWITCH_ENGINE_HPP
