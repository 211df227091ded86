#include "qswitch/engine.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace qswitch {

std::string_view to_string(AddressedDelivery d) {
  return d == AddressedDelivery::Routed ? "routed" : "direct";
}

AddressedDelivery addressed_delivery_from_string(std::string_view text) {
  if (text == "direct") return AddressedDelivery::Direct;
  if (text == "routed") return AddressedDelivery::Routed;
  throw std::invalid_argument("unknown addressed delivery mode '" + std::string(text) + "'");
}

// --- classical routing ---------------------------------------------------

ClassicalRoutes::ClassicalRoutes(const Topology& topo) {
  std::map<NodeId, std::set<NodeId>> adj;
  for (const auto& c : topo.channels()) {
    adj[c.from.node].insert(c.to.node);
    adj[c.to.node].insert(c.from.node);
  }
  for (const auto& [src, kind] : topo.nodes()) {
    auto& dist = dist_[src];
    dist[src] = 0;
    std::queue<NodeId> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop();
      for (NodeId v : adj[u]) {
        if (dist.emplace(v, dist[u] + 1).second) frontier.push(v);
      }
    }
  }
}

std::uint32_t ClassicalRoutes::hops(NodeId src, NodeId dst) const {
  auto s = dist_.find(src);
  if (s == dist_.end()) throw UnknownNode(src);
  auto d = s->second.find(dst);
  if (d == s->second.end()) {
    throw Unreachable("no classical path from " + std::to_string(src.value) + " to " +
                      std::to_string(dst.value));
  }
  return d->second;
}

SimTime route_classical(const Topology& topo, const Message& msg, SimTime hop_latency) {
  if (!topo.contains(msg.src)) throw UnknownNode(msg.src);
  if (!topo.contains(msg.dst)) throw UnknownNode(msg.dst);
  return hop_latency * ClassicalRoutes(topo).hops(msg.src, msg.dst);
}

// --- context -------------------------------------------------------------

class Engine::Context final : public NodeContext {
 public:
  Context(Engine& engine, NodeId self) : engine_(engine), self_(self) {}

  SimTime now() const override { return engine_.now_; }
  const ProtocolParams& params() const override { return engine_.options_.protocol; }
  void send_link(PortId via, Message msg) override {
    msg.src = self_;
    engine_.deliver_link(self_, via, std::move(msg));
  }
  void send_addressed(Message msg) override {
    msg.src = self_;
    engine_.deliver_addressed(std::move(msg));
  }
  void broadcast(NodeId src, const MessageBody& body) override {
    for (const auto& [id, node] : engine_.nodes_) {
      if (id != src) engine_.deliver_addressed(Message{self_, id, body});
    }
  }
  void set_timer(SimTime at, Timer timer) override {
    timer.node = self_;
    engine_.schedule_timer(at, timer);
  }
  void log(std::optional<SessionId> session, std::string_view kind, std::string detail) override {
    engine_.record(engine_.now_, self_, session, kind, std::move(detail));
  }

 private:
  Engine& engine_;
  NodeId self_;
};

// --- engine --------------------------------------------------------------

Engine::Engine(const Topology& topo, EngineOptions options)
    : topo_(topo), options_(options), routes_(topo_) {
  if (options_.hop_latency < 1) throw std::invalid_argument("hop_latency must be >= 1");
  for (const auto& [id, kind] : topo_.nodes()) nodes_.emplace(id, make_node(topo_, id));
}

Engine::~Engine() = default;

void Engine::schedule(Event event) {
  if (event.fire_at < now_) {
    throw PastEvent("event at t=" + std::to_string(event.fire_at) + " scheduled at t=" +
                    std::to_string(now_));
  }
  event.seq = next_seq_++;
  queue_.push(std::move(event));
}

void Engine::schedule_timer(SimTime at, Timer timer) {
  if (!nodes_.contains(timer.node)) throw UnknownNode(timer.node);
  schedule(Event{at, 0, TimerFire{timer}});
}

void Engine::record(SimTime t, NodeId node, std::optional<SessionId> session, std::string_view kind,
                    std::string detail) {
  log_.append(LogRecord{t, node, session, std::string(kind), std::move(detail)});
}

void Engine::deliver_link(NodeId src, PortId via, Message msg) {
  std::optional<PortId> arrival;
  for (const auto& c : topo_.channels()) {
    if (c.from.node == src && c.from.port == via && c.to.node == msg.dst) {
      arrival = c.to.port;
      break;
    }
    if (c.to.node == src && c.to.port == via && c.from.node == msg.dst) {
      arrival = c.from.port;
      break;
    }
  }
  if (!arrival) {
    throw AssertionFailure("node " + std::to_string(src.value) + " has no link to " +
                           std::to_string(msg.dst.value) + " on port " + std::to_string(via.value));
  }
  ++messages_sent_;
  if (options_.log_messages) record(now_, src, session_of(msg.body), log_kind::kSend, describe(msg));
  if (isolated_.contains(src) || isolated_.contains(msg.dst)) return;
  schedule(Event{now_ + options_.hop_latency, 0, Deliver{std::move(msg), arrival}});
}

void Engine::deliver_addressed(Message msg) {
  if (!nodes_.contains(msg.dst)) throw UnknownNode(msg.dst);
  SimTime delay = options_.hop_latency;
  if (options_.addressed == AddressedDelivery::Routed) {
    delay = options_.hop_latency * routes_.hops(msg.src, msg.dst);
  }
  ++messages_sent_;
  if (options_.log_messages) record(now_, msg.src, session_of(msg.body), log_kind::kSend, describe(msg));
  if (isolated_.contains(msg.src) || isolated_.contains(msg.dst)) return;
  schedule(Event{now_ + delay, 0, Deliver{std::move(msg), std::nullopt}});
}

bool Engine::step(SimTime limit) {
  if (queue_.empty() || queue_.top().fire_at > limit) return false;
  Event ev = queue_.top();
  queue_.pop();
  if (ev.fire_at < now_) throw PastEvent("causality violated");
  now_ = ev.fire_at;

  if (auto* d = std::get_if<Deliver>(&ev.payload)) {
    Node& target = *nodes_.at(d->msg.dst);
    ++deliveries_;
    if (options_.log_messages) {
      record(now_, d->msg.dst, session_of(d->msg.body), log_kind::kRecv, describe(d->msg));
    }
    Context ctx(*this, target.id());
    target.handle(Delivery{std::move(d->msg), d->arrival_port}, ctx);
  } else {
    const auto& t = std::get<TimerFire>(ev.payload).timer;
    Context ctx(*this, t.node);
    nodes_.at(t.node)->on_timer(t, ctx);
  }

  if (options_.audit) {
    auto problems = audit();
    if (!problems.empty()) {
      std::string text = "reservation audit failed at t=" + std::to_string(now_) + ":";
      for (const auto& p : problems) text += "\n  " + p;
      throw AssertionFailure(text);
    }
  }
  return true;
}

std::size_t Engine::run_until(SimTime limit) {
  std::size_t n = 0;
  while (step(limit)) ++n;
  return n;
}

void Engine::broadcast(NodeId src, const MessageBody& body) {
  if (!nodes_.contains(src)) throw UnknownNode(src);
  Context ctx(*this, src);
  ctx.broadcast(src, body);
}

std::uint64_t Engine::run_discovery() {
  const auto before = messages_sent_;
  for (auto& [id, node] : nodes_) {
    Context ctx(*this, id);
    node->start_discovery(ctx);
  }
  run_until(std::numeric_limits<SimTime>::max());
  for (auto& [id, node] : nodes_) node->finish_discovery();
  const auto sent = messages_sent_ - before;
  record(now_, NodeId{0}, std::nullopt, log_kind::kDiscoveryDone, "messages=" + std::to_string(sent));
  return sent;
}

Node& Engine::node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNode(id);
  return *it->second;
}

const Node& Engine::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNode(id);
  return *it->second;
}

EndNode& Engine::end_node(NodeId id) {
  auto* e = dynamic_cast<EndNode*>(&node(id));
  if (!e) throw std::invalid_argument("node " + std::to_string(id.value) + " is not an end node");
  return *e;
}

std::vector<NodeId> Engine::node_ids() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) out.push_back(id);
  return out;
}

std::vector<std::string> Engine::audit() const {
  std::vector<std::string> out;
  for (const auto& [id, node] : nodes_) {
    const auto& res = node->reservations();
    const auto& paths = node->paths();
    for (const auto& [port, r] : res.ports()) {
      if (!paths.contains(r.owner)) {
        out.push_back("node " + std::to_string(id.value) + " port " + std::to_string(port.value) +
                      " held by session " + to_string(r.owner.session) + " without a path record");
      }
    }
    for (const auto& [key, rec] : paths) {
      for (auto port : {rec.in_port, rec.out_port}) {
        if (!port) continue;
        auto holder = res.holder(*port);
        if (!holder || *holder != key) {
          out.push_back("node " + std::to_string(id.value) + " path of session " +
                        to_string(key.session) + " lost port " + std::to_string(port->value));
        }
      }
    }
    if (node->kind() == NodeKind::Bsa) {
      std::set<SessionId> sessions;
      for (const auto& [port, r] : res.ports()) sessions.insert(r.owner.session);
      if (sessions.size() > 1) {
        out.push_back("bsa " + std::to_string(id.value) + " shared by " +
                      std::to_string(sessions.size()) + " sessions");
      }
    }
  }
  return out;
}

std::size_t Engine::open_sessions() const {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes_) {
    if (const auto* e = dynamic_cast<const EndNode*>(node.get())) n += e->lead_sessions().size();
  }
  return n;
}

std::size_t Engine::total_reservations() const {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes_) n += node->reservations().ports().size();
  return n;
}

std::vector<std::vector<Endpoint>> Engine::reserved_paths(const SessionId& session,
                                                          std::uint32_t attempt) const {
  std::vector<std::vector<Endpoint>> out;
  for (const auto& [id, node] : nodes_) {
    if (node->kind() != NodeKind::EndNode) continue;
    for (const auto& [key, rec] : node->paths()) {
      if (key.session != session || key.attempt != attempt || key.requester != id) continue;
      std::vector<Endpoint> path;
      NodeId at = id;
      const PathRecord* cur = &rec;
      while (true) {
        if (cur->in_port) path.push_back({at, *cur->in_port});
        if (cur->out_port) path.push_back({at, *cur->out_port});
        if (!cur->downstream) break;
        at = *cur->downstream;
        const auto& next_paths = nodes_.at(at)->paths();
        auto it = next_paths.find(key);
        if (it == next_paths.end()) break;
        cur = &it->second;
      }
      out.push_back(std::move(path));
    }
  }
  return out;
}

// --- configuration and runs ----------------------------------------------

void SimConfig::validate() const {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
  if (horizon <= 0) throw std::invalid_argument("horizon must be > 0");
  if (hop_latency < 1) throw std::invalid_argument("hop_latency must be >= 1");
  if (grace < 0) throw std::invalid_argument("grace must be >= 0");
  if (protocol.session_hold < 0 || protocol.reconfiguration_delay < 0 ||
      protocol.request_timeout < 0 || protocol.dequeue_delay < 0) {
    throw std::invalid_argument("protocol durations must be >= 0");
  }
}

Topology SimConfig::build_topology() const {
  if (const auto* p = std::get_if<QFlyParams>(&topology)) return generate_qfly(*p);
  return std::get<Topology>(topology);
}

RunResult run(const SimConfig& config) {
  config.validate();
  Topology topo = config.build_topology();
  topo.validate();

  EngineOptions opts;
  opts.hop_latency = config.hop_latency;
  opts.addressed = config.addressed;
  opts.protocol = config.protocol;
  opts.audit = config.audit;
  opts.log_messages = config.log_messages;
  Engine engine(topo, opts);

  RunResult result;
  result.topology_name = topo.name();
  result.node_count = topo.nodes().size();
  result.channel_count = topo.channels().size();
  result.discovery_messages = engine.run_discovery();
  result.traffic_epoch = engine.now();

  result.requests = generate_traffic(topo, config.lambda, config.horizon, config.seed);
  for (const auto& r : result.requests) {
    engine.schedule_timer(result.traffic_epoch + r.at,
                          Timer{TimerKind::TrafficArrival, r.src, SessionId{}, r.dst});
  }
  engine.run_until(result.traffic_epoch + config.horizon + config.grace);
  result.end_time = engine.now();

  const auto open = engine.open_sessions();
  if (engine.idle() && open > 0) {
    throw DeadlockDetected(std::to_string(open) + " session(s) open with no pending events at t=" +
                           std::to_string(engine.now()));
  }
  result.unresolved = open;
  if (open == 0 && engine.total_reservations() != 0) {
    throw AssertionFailure(std::to_string(engine.total_reservations()) +
                           " port reservation(s) left after every session ended");
  }
  result.log = std::move(engine.log());
  return result;
}

}  // namespace qswitch
