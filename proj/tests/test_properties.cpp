#include <doctest.h>

#include "support.hpp"

using namespace qswitch;
using namespace qswitch::testing;

TEST_SUITE("properties") {

TEST_CASE("port exclusivity and path consistency under load") {
  for (const char* preset : {"sphd20", "dphd42"}) {
    SimConfig c = preset_config(preset, 75, 11);
    Topology t = c.build_topology();
    EngineOptions opts;
    opts.log_messages = false;
    Engine e(t, opts);  // audit runs after every event
    e.run_discovery();
    for (const auto& r : generate_traffic(t, c.lambda, c.horizon, c.seed)) {
      e.schedule_timer(e.now() + r.at, Timer{TimerKind::TrafficArrival, r.src, {}, r.dst});
    }
    auto bad = run_with_path_checks(e, 1'000'000);
    CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
    CHECK(e.open_sessions() == 0);
    CHECK(e.total_reservations() == 0);
  }
}

TEST_CASE("cleanup after forced rejections") {
  Topology t = generate_qfly(QFlyParams::sphd20());
  EngineOptions opts;
  opts.log_messages = false;
  Engine e(t, opts);
  e.run_discovery();
  // Block the first port from group switch 0 toward each of its BSAs.
  const PathKey blocker{SessionId{NodeId{999}, 0}, 1, NodeId{999}};
  std::vector<PortId> blocked;
  for (const auto& n : t.neighbors(NodeId{0})) {
    if (t.kind(n.node) == NodeKind::Bsa && n.remote_port == PortId{0}) {
      e.node(NodeId{0}).inject_reservation(n.local_port, blocker, e.now());
      blocked.push_back(n.local_port);
    }
  }
  REQUIRE(blocked.size() == 2);
  for (const auto& r : generate_traffic(t, 50, 3'000, 5)) {
    e.schedule_timer(e.now() + r.at, Timer{TimerKind::TrafficArrival, r.src, {}, r.dst});
  }
  const SimTime release_at = e.now() + 4'000;
  e.run_until(release_at);
  std::size_t rejects = 0;
  for (const auto& r : e.log().records()) rejects += r.kind == log_kind::kReject;
  CHECK(rejects > 0);
  e.node(NodeId{0}).clear_injected(blocker);
  e.run_until(1'000'000);
  CHECK(e.open_sessions() == 0);
  CHECK(e.total_reservations() == 0);
  for (NodeId id : e.node_ids()) CHECK(e.node(id).paths().empty());
}

TEST_CASE("the earlier reservation wins a simultaneous contest") {
  Engine e(load_topology_file(data_path("star4.topo")), EngineOptions{});
  e.run_discovery();
  const SimTime t = e.now() + 1;
  e.schedule_timer(t, Timer{TimerKind::TrafficArrival, NodeId{2}, {}, NodeId{3}});
  e.schedule_timer(t, Timer{TimerKind::TrafficArrival, NodeId{4}, {}, NodeId{5}});
  e.run_until(1'000'000);
  const SessionId first{NodeId{2}, 0}, second{NodeId{4}, 0};
  std::size_t first_rejected = 0, second_rejected = 0;
  std::optional<SimTime> first_active;
  for (const auto& r : e.log().records()) {
    if (r.kind == log_kind::kReject) {
      first_rejected += r.session == first;
      second_rejected += r.session == second;
    }
    if (r.kind == log_kind::kActive && r.session == first) first_active = r.time;
  }
  CHECK(first_rejected == 0);
  CHECK(second_rejected > 0);
  REQUIRE(first_active);
  CHECK(*first_active - t < 15);
  CHECK(e.open_sessions() == 0);
}

TEST_CASE("a held port is never taken over") {
  // Replay of the contest at the port level: whichever request reaches a
  // port first keeps it until its own release.
  SimConfig c = preset_config("dphd42", 50, 9);
  Topology t = c.build_topology();
  EngineOptions opts;
  opts.log_messages = false;
  Engine e(t, opts);
  e.run_discovery();
  for (const auto& r : generate_traffic(t, c.lambda, c.horizon, c.seed)) {
    e.schedule_timer(e.now() + r.at, Timer{TimerKind::TrafficArrival, r.src, {}, r.dst});
  }
  std::map<std::pair<NodeId, PortId>, PathKey> owner;
  std::size_t violations = 0;
  while (e.step(1'000'000)) {
    std::map<std::pair<NodeId, PortId>, PathKey> now;
    for (NodeId id : e.node_ids()) {
      for (const auto& [port, r] : e.node(id).reservations().ports()) now[{id, port}] = r.owner;
    }
    for (const auto& [ep, key] : now) {
      auto it = owner.find(ep);
      if (it != owner.end() && it->second != key) ++violations;
    }
    owner = std::move(now);
  }
  CHECK(violations == 0);
}

TEST_CASE("two runs, identical logs") {
  for (const char* preset : {"sphd20", "dphd42"}) {
    SimConfig c = preset_config(preset, 100, 21);
    c.log_messages = true;
    CHECK(run(c).log == run(c).log);
  }
}

TEST_CASE("no deadlock at lambda 10 on DPHD-42") {
  SimConfig c = preset_config("dphd42", 10, 1);
  RunResult r;
  CHECK_NOTHROW(r = run(c));
  CHECK(r.unresolved == 0);
  auto s = summarize(r.log);
  CHECK(s.requests == s.completed + s.expired);
}

TEST_CASE("monotone candidates within one activation") {
  EngineOptions opts;
  opts.protocol.reject_policy = RejectPolicy::NextCandidate;
  opts.log_messages = true;
  Topology t = generate_qfly(QFlyParams::dphd42());
  Engine e(t, opts);
  e.run_discovery();
  for (const auto& r : generate_traffic(t, 40, 5'000, 3)) {
    e.schedule_timer(e.now() + r.at, Timer{TimerKind::TrafficArrival, r.src, {}, r.dst});
  }
  std::map<SessionId, std::uint32_t> last_rank;
  std::size_t checked = 0;
  e.run_until(1'000'000);
  // Ranks in TargetSelection sends restart at 0 on each activation and
  // otherwise rise by one, so costs along them never fall.
  for (const auto& r : e.log().records()) {
    if (r.kind != log_kind::kSend || r.detail.rfind("TargetSelection", 0) != 0 || !r.session) continue;
    auto rank = detail_field(r.detail, "rank");
    REQUIRE(rank);
    const auto value = static_cast<std::uint32_t>(std::stoul(*rank));
    auto it = last_rank.find(*r.session);
    if (it != last_rank.end() && value != 0) CHECK(value == it->second + 1);
    last_rank[*r.session] = value;
    ++checked;
  }
  CHECK(checked > 0);
}

}  // TEST_SUITE
