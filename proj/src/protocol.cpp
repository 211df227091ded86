#include "qswitch/protocol.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "qswitch/event_log.hpp"

namespace qswitch {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string key_detail(const PathKey& k) {
  return "attempt=" + std::to_string(k.attempt) + " requester=" + std::to_string(k.requester.value);
}

}  // namespace

std::string_view to_string(RejectPolicy p) {
  return p == RejectPolicy::Queue ? "queue" : "next_candidate";
}

RejectPolicy reject_policy_from_string(std::string_view text) {
  if (text == "queue") return RejectPolicy::Queue;
  if (text == "next_candidate" || text == "next-candidate") return RejectPolicy::NextCandidate;
  throw std::invalid_argument("unknown reject policy '" + std::string(text) + "'");
}

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::AwaitingPeerTable:
      return "AwaitingPeerTable";
    case SessionState::Selecting:
      return "Selecting";
    case SessionState::AwaitingTargetAck:
      return "AwaitingTargetAck";
    case SessionState::Reserving:
      return "Reserving";
    case SessionState::AwaitingPeerReservation:
      return "AwaitingPeerReservation";
    case SessionState::ReservationDone:
      return "ReservationDone";
    case SessionState::AwaitingStartAck:
      return "AwaitingStartAck";
    case SessionState::Active:
      return "Active";
    case SessionState::Queued:
      return "Queued";
    case SessionState::Failed:
      return "Failed";
  }
  return "?";
}

// --- ReservationTable ----------------------------------------------------

bool ReservationTable::available(PortId port, const PathKey& key) const {
  auto it = ports_.find(port);
  return it == ports_.end() || it->second.owner == key;
}

void ReservationTable::reserve(PortId port, const PathKey& key, SimTime now) {
  if (!available(port, key)) {
    throw AssertionFailure("port " + std::to_string(port.value) + " already reserved");
  }
  ports_.try_emplace(port, PortReservation{port, key, now});
}

std::size_t ReservationTable::release(const PathKey& key) {
  return std::erase_if(ports_, [&](const auto& kv) { return kv.second.owner == key; });
}

std::optional<PathKey> ReservationTable::holder(PortId port) const {
  auto it = ports_.find(port);
  if (it == ports_.end()) return std::nullopt;
  return it->second.owner;
}

std::size_t ReservationTable::count_for(const SessionId& session) const {
  return static_cast<std::size_t>(std::count_if(
      ports_.begin(), ports_.end(), [&](const auto& kv) { return kv.second.owner.session == session; }));
}

// --- merge ---------------------------------------------------------------

std::vector<MergedBsaEntry> merge_tables(const BsaTable& lead_table, const BsaTable& peer_table) {
  std::map<NodeId, std::vector<const BsaTableEntry*>> peer_by_bsa;
  for (const auto& e : peer_table.entries) peer_by_bsa[e.bsa].push_back(&e);

  std::vector<MergedBsaEntry> out;
  for (const auto& a : lead_table.entries) {
    auto it = peer_by_bsa.find(a.bsa);
    if (it == peer_by_bsa.end()) continue;
    for (const BsaTableEntry* b : it->second) {
      if (b->bsa_port == a.bsa_port) continue;
      out.push_back({a.bsa, a.bsa_port, b->bsa_port, a.cost + b->cost});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.combined_cost, x.bsa, x.port_for_lead, x.port_for_peer) <
           std::tie(y.combined_cost, y.bsa, y.port_for_lead, y.port_for_peer);
  });
  return out;
}

// --- Node ----------------------------------------------------------------

Node::Node(NodeId id, NodeKind kind, std::vector<Neighbor> adjacency)
    : id_(id), kind_(kind), discovery_(id, kind, std::move(adjacency)), table_{id, {}} {}

void Node::start_discovery(NodeContext& ctx) {
  auto lsa = discovery_.emit_announcement();
  for (const auto& n : discovery_.adjacency()) {
    ctx.send_link(n.local_port, Message{id_, n.node, lsa});
  }
}

void Node::finish_discovery() { table_ = compute_bsa_table(discovery_.database(), id_); }

void Node::handle(const Delivery& d, NodeContext& ctx) {
  if (const auto* lsa = std::get_if<LinkStateAnnouncement>(&d.msg.body)) {
    if (!d.arrival_port) throw AssertionFailure("announcement delivered without arrival port");
    for (const auto& [port, copy] : discovery_.handle_announcement(*lsa, *d.arrival_port)) {
      for (const auto& n : discovery_.adjacency()) {
        if (n.local_port == port) ctx.send_link(port, Message{id_, n.node, copy});
      }
    }
    return;
  }
  on_message(d, ctx);
}

void Node::on_timer(const Timer&, NodeContext&) {}

std::optional<PortId> Node::out_port_toward(NodeId next, NodeId bsa, PortId bsa_port) const {
  for (const auto& n : discovery_.adjacency()) {
    if (n.node != next || n.direction == Direction::In) continue;
    if (next == bsa && n.remote_port != bsa_port) continue;
    return n.local_port;
  }
  return std::nullopt;
}

void Node::release_path(const PathKey& key, NodeContext& ctx) {
  auto it = paths_.find(key);
  if (it == paths_.end()) return;
  const PathRecord rec = it->second;
  paths_.erase(it);
  const auto freed = reservations_.release(key);
  ctx.log(key.session, log_kind::kRelease, key_detail(key) + " ports=" + std::to_string(freed));
  if (rec.downstream && rec.out_port) {
    ctx.send_link(*rec.out_port,
                  Message{id_, *rec.downstream, ReleaseResources{key.session, key.attempt, key.requester}});
  }
}

void Node::inject_reservation(PortId port, const PathKey& key, SimTime now) {
  reservations_.reserve(port, key, now);
  paths_.try_emplace(key, PathRecord{});
}

void Node::clear_injected(const PathKey& key) {
  reservations_.release(key);
  paths_.erase(key);
}

// --- EndNode -------------------------------------------------------------

Session* EndNode::find_session(const SessionId& id) {
  if (auto it = sessions_.find(id); it != sessions_.end()) return &it->second;
  if (follower_ && follower_->id == id) return &*follower_;
  return nullptr;
}

std::vector<SessionId> EndNode::queue() const {
  std::vector<SessionId> out;
  for (const auto& [t, id] : queue_) out.push_back(id);
  return out;
}

void EndNode::set_state(Session& s, SessionState next, NodeContext& ctx) {
  if (s.state == next) return;
  ctx.log(s.id, log_kind::kState,
          std::string(to_string(s.state)) + "->" + std::string(to_string(next)));
  s.state = next;
}

void EndNode::send_to_peer(const Session& s, MessageBody body, NodeContext& ctx) {
  ctx.send_addressed(Message{id_, s.peer, std::move(body)});
}

SessionId EndNode::initiate_request(NodeId peer, NodeContext& ctx) {
  if (peer == id_) {
    throw SelfRequest("node " + std::to_string(id_.value) + " cannot request a link to itself");
  }
  const SessionId sid{id_, next_serial_++};
  Session fresh;
  fresh.id = sid;
  fresh.role = Role::Lead;
  fresh.peer = peer;
  fresh.created_at = ctx.now();
  fresh.timeout_at = ctx.now() + ctx.params().request_timeout;
  Session& s = sessions_.emplace(sid, std::move(fresh)).first->second;
  ctx.log(sid, log_kind::kRequest, "peer=" + std::to_string(peer.value));
  if (busy()) {
    enqueue_request(s, "lead_busy", ctx);
  } else {
    start_activation(s, ctx);
  }
  return sid;
}

void EndNode::start_activation(Session& s, NodeContext& ctx) {
  engaged_ = s.id;
  s.candidates.clear();
  s.current_candidate = 0;
  s.own_done = s.peer_done = false;
  set_state(s, SessionState::AwaitingPeerTable, ctx);
  send_to_peer(s, RequestBsaTable{s.id}, ctx);
}

void EndNode::select_and_propose(Session& s, NodeContext& ctx) {
  if (s.current_candidate >= s.candidates.size()) {
    ctx.log(s.id, log_kind::kState, "candidates_exhausted");
    send_to_peer(s, RequestQueuedNotice{s.id}, ctx);
    enqueue_request(s, "exhausted", ctx);
    return;
  }
  const auto rank = static_cast<std::uint32_t>(s.current_candidate);
  const MergedBsaEntry c = s.candidates[s.current_candidate++];
  ++s.attempt;
  s.target_bsa = c.bsa;
  s.target_port = c.port_for_lead;
  const auto* own = table_.find(c.bsa, c.port_for_lead);
  s.target_cost = own ? own->cost : 0;
  s.own_done = s.peer_done = false;
  set_state(s, SessionState::AwaitingTargetAck, ctx);
  send_to_peer(s, TargetSelection{s.id, s.attempt, c.bsa, c.port_for_peer, rank}, ctx);
}

void EndNode::begin_reservation(Session& s, NodeContext& ctx) {
  const auto* entry = table_.find(s.target_bsa, s.target_port);
  if (!entry) {
    throw AssertionFailure("node " + std::to_string(id_.value) + " has no route to bsa " +
                           std::to_string(s.target_bsa.value) + ":" +
                           std::to_string(s.target_port.value));
  }
  const auto out = out_port_toward(entry->next_hop, s.target_bsa, s.target_port);
  if (!out) throw AssertionFailure("no outbound port toward next hop");
  const PathKey key{s.id, s.attempt, id_};
  reservations_.reserve(*out, key, ctx.now());
  paths_[key] = PathRecord{std::nullopt, std::nullopt, entry->next_hop, *out};
  s.target_cost = entry->cost;
  s.path_open = true;
  s.own_done = false;
  set_state(s, SessionState::Reserving, ctx);
  ctx.send_link(*out, Message{id_, entry->next_hop,
                              RouteReserveRequest{s.id, s.attempt, s.target_bsa, s.target_port, id_}});
}

void EndNode::close_own_path(Session& s, NodeContext& ctx) {
  if (!s.path_open) return;
  release_path(PathKey{s.id, s.attempt, id_}, ctx);
  s.path_open = false;
}

void EndNode::handle_reject(Session& s, const RouteReserveReject& rej, NodeContext& ctx) {
  ++s.retries;
  ctx.log(s.id, log_kind::kRetry,
          "attempt=" + std::to_string(rej.attempt) + " rejecting=" +
              std::to_string(rej.rejecting_node.value) + " retries=" + std::to_string(s.retries));
  close_own_path(s, ctx);
  if (rej.requester == id_) {
    // The peer has not heard about the rejection yet.
    send_to_peer(s, ReleaseResources{s.id, s.attempt, s.peer}, ctx);
  }
  if (ctx.params().reject_policy == RejectPolicy::Queue) {
    send_to_peer(s, RequestQueuedNotice{s.id}, ctx);
    enqueue_request(s, "rejected", ctx);
    return;
  }
  set_state(s, SessionState::Selecting, ctx);
  select_and_propose(s, ctx);
}

void EndNode::reservation_done(Session& s, NodeContext& ctx) {
  set_state(s, SessionState::ReservationDone, ctx);
  send_to_peer(s, ReservationComplete{s.id, s.attempt}, ctx);
  complete_and_schedule(s, ctx);
}

void EndNode::complete_and_schedule(Session& s, NodeContext& ctx) {
  s.start_time = ctx.now() + ctx.params().reconfiguration_delay;
  send_to_peer(s, ProposeStartTime{s.id, s.attempt, s.start_time}, ctx);
  set_state(s, SessionState::AwaitingStartAck, ctx);
}

void EndNode::enqueue_request(Session& s, std::string_view reason, NodeContext& ctx) {
  s.queued = true;
  set_state(s, SessionState::Queued, ctx);
  queue_.emplace(s.created_at, s.id);
  ctx.log(s.id, log_kind::kQueued, "reason=" + std::string(reason));
  if (engaged_ == s.id) engaged_.reset();
  became_free(ctx);
}

std::optional<SessionId> EndNode::dequeue_next(NodeContext& ctx) {
  while (!queue_.empty()) {
    const auto [arrival, sid] = *queue_.begin();
    queue_.erase(queue_.begin());
    Session& s = sessions_.at(sid);
    if (ctx.now() > s.timeout_at) {
      set_state(s, SessionState::Failed, ctx);
      ctx.log(sid, log_kind::kExpired, "waited=" + std::to_string(ctx.now() - s.created_at));
      sessions_.erase(sid);
      continue;
    }
    resuming_ = sid;
    ctx.set_timer(ctx.now() + ctx.params().dequeue_delay, Timer{TimerKind::Resume, id_, sid, s.peer});
    return sid;
  }
  return std::nullopt;
}

void EndNode::became_free(NodeContext& ctx) {
  if (!busy() && !queue_.empty()) dequeue_next(ctx);
}

void EndNode::end_session(Session& s, NodeContext& ctx) {
  close_own_path(s, ctx);
  send_to_peer(s, ReleaseResources{s.id, s.attempt, s.peer}, ctx);
  ctx.log(s.id, log_kind::kEnd, "role=lead");
  const SessionId sid = s.id;
  sessions_.erase(sid);
  if (engaged_ == sid) engaged_.reset();
  became_free(ctx);
}

void EndNode::on_timer(const Timer& timer, NodeContext& ctx) {
  switch (timer.kind) {
    case TimerKind::TrafficArrival:
      initiate_request(timer.peer, ctx);
      break;
    case TimerKind::Resume: {
      resuming_.reset();
      Session& s = sessions_.at(timer.session);
      if (engaged_) {
        enqueue_request(s, "lead_busy", ctx);
        break;
      }
      s.dequeued_at = ctx.now();
      ctx.log(s.id, log_kind::kDequeued, "waited=" + std::to_string(ctx.now() - s.created_at));
      start_activation(s, ctx);
      break;
    }
    case TimerKind::SessionHoldEnd:
      if (Session* s = find_session(timer.session); s && s->role == Role::Lead) end_session(*s, ctx);
      break;
  }
}

void EndNode::on_message(const Delivery& d, NodeContext& ctx) {
  std::visit(overloaded{
                 [&](const RequestBsaTable& m) { on_request_table(d.msg, m, ctx); },
                 [&](const BsaTableResponse& m) { on_table(m, ctx); },
                 [&](const TargetSelection& m) { on_target(m, ctx); },
                 [&](const TargetAck& m) { on_target_ack(m, ctx); },
                 [&](const RouteReserveAck& m) { on_reserve_ack(m, ctx); },
                 [&](const RouteReserveReject& m) { on_reject(m, ctx); },
                 [&](const ReleaseResources& m) { on_release(m, ctx); },
                 [&](const ReservationComplete& m) { on_reservation_complete(m, ctx); },
                 [&](const ProposeStartTime& m) { on_propose(m, ctx); },
                 [&](const StartTimeAck& m) { on_start_ack(m, ctx); },
                 [&](const RequestQueuedNotice& m) { on_queued_notice(m, ctx); },
                 [&](const auto&) {},
             },
             d.msg.body);
}

void EndNode::on_request_table(const Message& m, const RequestBsaTable& r, NodeContext& ctx) {
  // A node waiting out its de-queue delay still serves peers; its own
  // request defers if it is engaged when the delay ends.
  if (engaged_) {
    ctx.log(r.session, log_kind::kReject, "busy_follower");
    ctx.send_addressed(Message{id_, m.src, RequestQueuedNotice{r.session}});
    return;
  }
  engaged_ = r.session;
  Session f;
  f.id = r.session;
  f.role = Role::Follower;
  f.peer = m.src;
  f.state = SessionState::Selecting;
  f.created_at = ctx.now();
  follower_ = std::move(f);
  ctx.send_addressed(Message{id_, m.src, BsaTableResponse{r.session, table_}});
}

void EndNode::on_table(const BsaTableResponse& r, NodeContext& ctx) {
  auto it = sessions_.find(r.session);
  if (it == sessions_.end() || it->second.state != SessionState::AwaitingPeerTable) return;
  Session& s = it->second;
  s.candidates = merge_tables(table_, r.table);
  s.current_candidate = 0;
  set_state(s, SessionState::Selecting, ctx);
  select_and_propose(s, ctx);
}

void EndNode::on_target(const TargetSelection& t, NodeContext& ctx) {
  if (!follower_ || follower_->id != t.session || t.attempt <= follower_->attempt) return;
  Session& f = *follower_;
  close_own_path(f, ctx);
  f.attempt = t.attempt;
  f.target_bsa = t.bsa;
  f.target_port = t.port_for_receiver;
  ctx.send_addressed(Message{id_, f.peer, TargetAck{f.id, f.attempt}});
  begin_reservation(f, ctx);
}

void EndNode::on_target_ack(const TargetAck& a, NodeContext& ctx) {
  auto it = sessions_.find(a.session);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  if (s.attempt != a.attempt || s.state != SessionState::AwaitingTargetAck) return;
  begin_reservation(s, ctx);
}

void EndNode::on_reserve_ack(const RouteReserveAck& a, NodeContext& ctx) {
  if (a.requester != id_) return;
  Session* s = find_session(a.session);
  if (!s || s->attempt != a.attempt || !s->path_open || s->state != SessionState::Reserving) return;
  s->own_done = true;
  if (s->role == Role::Follower) {
    send_to_peer(*s, ReservationComplete{s->id, s->attempt}, ctx);
    set_state(*s, SessionState::AwaitingPeerReservation, ctx);
    return;
  }
  if (s->peer_done) {
    reservation_done(*s, ctx);
  } else {
    set_state(*s, SessionState::AwaitingPeerReservation, ctx);
  }
}

void EndNode::on_reservation_complete(const ReservationComplete& r, NodeContext& ctx) {
  Session* s = find_session(r.session);
  if (!s || s->attempt != r.attempt) return;
  if (s->role == Role::Follower) {
    if (s->state == SessionState::AwaitingPeerReservation) {
      set_state(*s, SessionState::ReservationDone, ctx);
    }
    return;
  }
  const bool reserving = s->state == SessionState::Reserving ||
                         s->state == SessionState::AwaitingPeerReservation ||
                         s->state == SessionState::AwaitingTargetAck;
  if (!reserving) return;
  s->peer_done = true;
  if (s->own_done) reservation_done(*s, ctx);
}

void EndNode::on_propose(const ProposeStartTime& p, NodeContext& ctx) {
  if (!follower_ || follower_->id != p.session || follower_->attempt != p.attempt) return;
  follower_->start_time = p.start_time;
  send_to_peer(*follower_, StartTimeAck{p.session, p.attempt}, ctx);
  set_state(*follower_, SessionState::Active, ctx);
}

void EndNode::on_start_ack(const StartTimeAck& a, NodeContext& ctx) {
  auto it = sessions_.find(a.session);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  if (s.attempt != a.attempt || s.state != SessionState::AwaitingStartAck) return;
  s.completed_at = ctx.now();
  set_state(s, SessionState::Active, ctx);
  ctx.log(s.id, log_kind::kActive,
          "bsa=" + std::to_string(s.target_bsa.value) + " retries=" + std::to_string(s.retries) +
              " candidates=" + std::to_string(s.candidates.size()) +
              " elapsed=" + std::to_string(ctx.now() - s.created_at));
  ctx.set_timer(std::max(ctx.now(), s.start_time) + ctx.params().session_hold,
                Timer{TimerKind::SessionHoldEnd, id_, s.id, s.peer});
}

void EndNode::on_reject(const RouteReserveReject& r, NodeContext& ctx) {
  if (r.session.lead == id_) {
    auto it = sessions_.find(r.session);
    if (it == sessions_.end()) return;
    Session& s = it->second;
    const bool live = s.state == SessionState::Reserving ||
                      s.state == SessionState::AwaitingPeerReservation ||
                      s.state == SessionState::AwaitingTargetAck;
    if (s.attempt != r.attempt || !live) return;
    handle_reject(s, r, ctx);
    return;
  }
  if (!follower_ || follower_->id != r.session || r.requester != id_) return;
  Session& f = *follower_;
  if (f.attempt != r.attempt || f.state != SessionState::Reserving) return;
  close_own_path(f, ctx);
  send_to_peer(f, r, ctx);
  set_state(f, SessionState::Selecting, ctx);
}

void EndNode::on_release(const ReleaseResources& r, NodeContext& ctx) {
  if (!follower_ || follower_->id != r.session) return;
  Session& f = *follower_;
  if (f.state == SessionState::Active) {
    close_own_path(f, ctx);
    ctx.log(f.id, log_kind::kEnd, "role=follower");
    follower_.reset();
    if (engaged_ == r.session) engaged_.reset();
    became_free(ctx);
    return;
  }
  if (r.attempt != f.attempt) return;
  close_own_path(f, ctx);
  set_state(f, SessionState::Selecting, ctx);
}

void EndNode::on_queued_notice(const RequestQueuedNotice& n, NodeContext& ctx) {
  if (n.session.lead == id_) {
    auto it = sessions_.find(n.session);
    if (it == sessions_.end() || it->second.state != SessionState::AwaitingPeerTable) return;
    enqueue_request(it->second, "peer_busy", ctx);
    return;
  }
  if (!follower_ || follower_->id != n.session) return;
  close_own_path(*follower_, ctx);
  follower_.reset();
  if (engaged_ == n.session) engaged_.reset();
  became_free(ctx);
}

// --- SwitchNode ----------------------------------------------------------

void SwitchNode::on_message(const Delivery& d, NodeContext& ctx) {
  std::visit(overloaded{
                 [&](const RouteReserveRequest& m) { switch_handle_reserve(d, m, ctx); },
                 [&](const RouteReserveAck& m) {
                   auto it = paths_.find(PathKey{m.session, m.attempt, m.requester});
                   if (it == paths_.end() || !it->second.upstream) return;
                   ctx.send_link(*it->second.in_port, Message{id_, *it->second.upstream, m});
                 },
                 [&](const RouteReserveReject& m) {
                   auto it = paths_.find(PathKey{m.session, m.attempt, m.requester});
                   if (it == paths_.end() || !it->second.upstream) return;
                   ctx.send_link(*it->second.in_port, Message{id_, *it->second.upstream, m});
                 },
                 [&](const ReleaseResources& m) {
                   release_path(PathKey{m.session, m.attempt, m.requester}, ctx);
                 },
                 [&](const auto&) {},
             },
             d.msg.body);
}

void SwitchNode::switch_handle_reserve(const Delivery& d, const RouteReserveRequest& req,
                                       NodeContext& ctx) {
  const PathKey key{req.session, req.attempt, req.requester};
  if (!d.arrival_port) throw AssertionFailure("reservation request without arrival port");
  const PortId in = *d.arrival_port;
  const NodeId upstream = d.msg.src;

  if (auto it = paths_.find(key); it != paths_.end()) {
    // Replayed request: already holding for this path, pass it on again.
    if (it->second.downstream) ctx.send_link(*it->second.out_port, Message{id_, *it->second.downstream, req});
    return;
  }

  auto reject = [&](std::string why) {
    ctx.log(req.session, log_kind::kReject, key_detail(key) + " " + why);
    ctx.send_link(in, Message{id_, upstream,
                              RouteReserveReject{req.session, req.attempt, req.requester, id_}});
  };

  const auto* entry = table_.find(req.bsa, req.bsa_port);
  if (!entry) return reject("reason=no_route");
  const auto out = out_port_toward(entry->next_hop, req.bsa, req.bsa_port);
  if (!out) return reject("reason=no_port");
  if (!reservations_.available(in, key)) return reject("reason=in_port_busy port=" + std::to_string(in.value));
  if (!reservations_.available(*out, key)) {
    return reject("reason=out_port_busy port=" + std::to_string(out->value));
  }
  if (entry->next_hop == req.bsa) {
    // The ports feeding one BSA go to a single session, as at the BSA itself.
    for (const auto& nb : discovery_.adjacency()) {
      if (nb.node != req.bsa) continue;
      auto holder = reservations_.holder(nb.local_port);
      if (holder && holder->session != req.session) {
        return reject("reason=bsa_feed_busy port=" + std::to_string(nb.local_port.value));
      }
    }
  }
  reservations_.reserve(in, key, ctx.now());
  reservations_.reserve(*out, key, ctx.now());
  paths_[key] = PathRecord{upstream, in, entry->next_hop, *out};
  ctx.log(req.session, log_kind::kReserve,
          key_detail(key) + " in=" + std::to_string(in.value) + " out=" + std::to_string(out->value));
  ctx.send_link(*out, Message{id_, entry->next_hop, req});
}

// --- BsaNode -------------------------------------------------------------

void BsaNode::on_message(const Delivery& d, NodeContext& ctx) {
  std::visit(overloaded{
                 [&](const RouteReserveRequest& m) { bsa_handle_reserve(d, m, ctx); },
                 [&](const ReleaseResources& m) {
                   release_path(PathKey{m.session, m.attempt, m.requester}, ctx);
                 },
                 [&](const auto&) {},
             },
             d.msg.body);
}

void BsaNode::bsa_handle_reserve(const Delivery& d, const RouteReserveRequest& req,
                                 NodeContext& ctx) {
  if (req.bsa != id_) {
    throw WrongBsa("reservation for bsa " + std::to_string(req.bsa.value) + " delivered to " +
                   std::to_string(id_.value));
  }
  const PathKey key{req.session, req.attempt, req.requester};
  const NodeId upstream = d.msg.src;
  const PortId in = d.arrival_port.value_or(req.bsa_port);
  if (in != req.bsa_port) {
    throw AssertionFailure("reservation for port " + std::to_string(req.bsa_port.value) +
                           " arrived on port " + std::to_string(in.value));
  }
  auto send_back = [&](MessageBody body) { ctx.send_link(in, Message{id_, upstream, std::move(body)}); };

  if (paths_.contains(key)) {
    send_back(RouteReserveAck{req.session, req.attempt, req.requester});
    return;
  }
  // One session at a time: any port held by another session blocks the BSA.
  bool other_session = false;
  for (const auto& [port, r] : reservations_.ports()) {
    if (r.owner.session != req.session) other_session = true;
  }
  if (other_session || !reservations_.available(in, key)) {
    ctx.log(req.session, log_kind::kReject, key_detail(key) + " reason=bsa_busy");
    send_back(RouteReserveReject{req.session, req.attempt, req.requester, id_});
    return;
  }
  reservations_.reserve(in, key, ctx.now());
  paths_[key] = PathRecord{upstream, in, std::nullopt, std::nullopt};
  ctx.log(req.session, log_kind::kReserve, key_detail(key) + " in=" + std::to_string(in.value));
  send_back(RouteReserveAck{req.session, req.attempt, req.requester});

  if (reservations_.ports().size() == 2 && reservations_.count_for(req.session) == 2 &&
      served_.insert(req.session).second) {
    ctx.log(req.session, log_kind::kBsaReady, "bsa=" + std::to_string(id_.value));
  }
}

std::unique_ptr<Node> make_node(const Topology& topo, NodeId id) {
  const NodeKind kind = topo.kind(id);
  auto adjacency = topo.neighbors(id);
  switch (kind) {
    case NodeKind::EndNode:
      return std::make_unique<EndNode>(id, kind, std::move(adjacency));
    case NodeKind::Switch:
      return std::make_unique<SwitchNode>(id, kind, std::move(adjacency));
    case NodeKind::Bsa:
      return std::make_unique<BsaNode>(id, kind, std::move(adjacency));
  }
  throw std::logic_error("unreachable node kind");
}

}  // namespace qswitch
