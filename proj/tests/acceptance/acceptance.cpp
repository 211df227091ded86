// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

#include "support.hpp"

using namespace qswitch;
using namespace qswitch::testing;

namespace {

struct Band {
  double lo, hi;
};

struct Row {
  const char* topo;
  double lambda;
  Band requests;
  Band immediate_pct;  // percent
  Band queued_comp;
};

// Published reference bands per (topology, lambda).
const Row kRows[] = {
    {"sphd20", 75, {120, 133}, {85, 89}, {125, 135}},   {"dphd42", 75, {118, 130}, {60, 74}, {150, 170}},
    {"sphd20", 100, {91, 104}, {85, 94}, {125, 135}},   {"dphd42", 100, {91, 98}, {73, 79}, {140, 150}},
    {"sphd20", 150, {53, 70}, {85, 88}, {122, 130}},    {"dphd42", 150, {62, 79}, {90, 100}, {125, 175}},
};

constexpr int kSeeds = 10;

struct Criterion {
  int failures = 0;
  void line(int id, bool ok, const std::string& what) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool injected_cleanup() {
  Topology t = generate_qfly(QFlyParams::sphd20());
  EngineOptions opts;
  opts.log_messages = false;
  Engine e(t, opts);
  e.run_discovery();
  const PathKey blocker{SessionId{NodeId{999}, 0}, 1, NodeId{999}};
  for (const auto& n : t.neighbors(NodeId{0})) {
    if (t.kind(n.node) == NodeKind::Bsa && n.remote_port == PortId{0}) {
      e.node(NodeId{0}).inject_reservation(n.local_port, blocker, e.now());
    }
  }
  for (const auto& r : generate_traffic(t, 50, 3'000, 5)) {
    e.schedule_timer(e.now() + r.at, Timer{TimerKind::TrafficArrival, r.src, {}, r.dst});
  }
  e.run_until(e.now() + 4'000);
  e.node(NodeId{0}).clear_injected(blocker);
  e.run_until(1'000'000);
  bool clean = e.open_sessions() == 0 && e.total_reservations() == 0;
  for (NodeId id : e.node_ids()) clean = clean && e.node(id).paths().empty();
  return clean;
}

bool fcfs_contest() {
  Engine e(load_topology_file(data_path("star4.topo")), EngineOptions{});
  e.run_discovery();
  const SimTime t = e.now() + 1;
  e.schedule_timer(t, Timer{TimerKind::TrafficArrival, NodeId{2}, {}, NodeId{3}});
  e.schedule_timer(t, Timer{TimerKind::TrafficArrival, NodeId{4}, {}, NodeId{5}});
  e.run_until(1'000'000);
  const SessionId first{NodeId{2}, 0}, second{NodeId{4}, 0};
  std::size_t first_rejected = 0, second_rejected = 0;
  for (const auto& r : e.log().records()) {
    if (r.kind != log_kind::kReject) continue;
    first_rejected += r.session == first;
    second_rejected += r.session == second;
  }
  return first_rejected == 0 && second_rejected > 0 && e.open_sessions() == 0;
}

std::vector<std::string> audited_run(const char* preset, double lambda, std::uint64_t seed) {
  SimConfig c = preset_config(preset, lambda, seed);
  Topology t = c.build_topology();
  EngineOptions opts;
  opts.log_messages = false;
  Engine e(t, opts);
  e.run_discovery();
  for (const auto& r : generate_traffic(t, c.lambda, c.horizon, c.seed)) {
    e.schedule_timer(e.now() + r.at, Timer{TimerKind::TrafficArrival, r.src, {}, r.dst});
  }
  auto bad = run_with_path_checks(e, 1'000'000);
  if (e.open_sessions() || e.total_reservations()) bad.push_back("state left behind");
  return bad;
}

}  // namespace

int main() {
  Criterion out;

  // 1-4 share one grid of runs.
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SimConfig> configs;
  for (const auto& row : kRows) {
    for (int s = 1; s <= kSeeds; ++s) configs.push_back(preset_config(row.topo, row.lambda, s));
  }
  const auto rows = sweep(configs, 0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool ok1 = true, ok2 = true;
  std::uint32_t worst_retries = 0;
  std::string retry_detail;
  std::map<std::string, std::map<double, double>> immediate_by_lambda;
  std::ostringstream detail;
  for (std::size_t i = 0; i < std::size(kRows); ++i) {
    const Row& row = kRows[i];
    bool a = true, c = true;
    double imm = 0, queued = 0;
    int queued_runs = 0;
    std::size_t lo_req = SIZE_MAX, hi_req = 0;
    for (int s = 0; s < kSeeds; ++s) {
      const auto& r = rows[i * kSeeds + s];
      if (!r.summary) {
        std::printf("  %s lambda=%g seed=%llu: %s\n", row.topo, row.lambda, static_cast<unsigned long long>(r.seed),
                    r.error.c_str());
        ok1 = ok2 = false;
        continue;
      }
      const auto& sum = *r.summary;
      lo_req = std::min(lo_req, sum.requests);
      hi_req = std::max(hi_req, sum.requests);
      a = a && sum.requests >= 0.8 * row.requests.lo && sum.requests <= 1.2 * row.requests.hi;
      c = c && sum.mean_comp < 15;
      imm += sum.immediate_completion_pct;
      if (sum.queued_completed) {
        queued += sum.mean_comp_queued;
        ++queued_runs;
      }
      if (sum.expired || sum.unresolved || sum.completed != sum.requests) {
        ok2 = false;
        std::printf("  %s lambda=%g seed=%llu: %zu expired, %zu unresolved\n", row.topo, row.lambda,
                    static_cast<unsigned long long>(r.seed), sum.expired, sum.unresolved);
      }
      if (sum.max_retries > worst_retries) {
        worst_retries = sum.max_retries;
        retry_detail = std::string(row.topo) + " lambda=" + fmt("%g", row.lambda) + " seed=" + std::to_string(r.seed);
      }
    }
    imm = 100 * imm / kSeeds;
    immediate_by_lambda[row.topo][row.lambda] = imm;
    queued = queued_runs ? queued / queued_runs : 0;
    const bool b = imm >= row.immediate_pct.lo - 10 && imm <= row.immediate_pct.hi + 10;
    const bool d = queued_runs == 0 || (queued >= 0.75 * row.queued_comp.lo && queued <= 1.25 * row.queued_comp.hi);
    ok1 = ok1 && a && b && c && d;
    std::printf("  %-6s lambda=%-3g requests %zu-%zu [%s]  immediate %.1f%% [%s]  uncontested<15 [%s]  "
                "queued comp %.1f [%s]\n",
                row.topo, row.lambda, lo_req, hi_req, a ? "ok" : "out", imm, b ? "ok" : "out", c ? "ok" : "out",
                queued, d ? "ok" : "out");
  }
  out.line(1, ok1, fmt("table reproduction over %g seeds per row, %.2f s total", kSeeds, seconds));
  out.line(2, ok2, "every request completes, none expired");
  out.line(3, worst_retries <= 2,
           "max retries " + std::to_string(worst_retries) + (retry_detail.empty() ? "" : " at " + retry_detail));

  const auto& sp = immediate_by_lambda["sphd20"];
  const bool sp_trend = sp.at(100) >= sp.at(75) - 3 && sp.at(150) >= sp.at(100) - 3;
  const auto& dp = immediate_by_lambda["dphd42"];
  double dmin = 100, dmax = 0;
  for (const auto& [l, v] : dp) dmin = std::min(dmin, v), dmax = std::max(dmax, v);
  out.line(4, sp_trend && dmax - dmin <= 35,
           fmt("SPHD-20 immediate %.1f/%.1f/%.1f%%, DPHD-42 spread %.1fpp", sp.at(75), sp.at(100), sp.at(150),
               dmax - dmin));

  std::size_t mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) mismatches += oracle_mismatches(random_topology(seed)).size();
  out.line(5, mismatches == 0, std::to_string(mismatches) + " oracle mismatches over 100 random topologies");

  std::vector<std::string> failed;
  try {
    for (const char* preset : {"sphd20", "dphd42"}) {
      if (!audited_run(preset, 75, 11).empty()) failed.push_back(std::string("exclusivity/paths ") + preset);
    }
    if (!injected_cleanup()) failed.push_back("cleanup");
    if (!fcfs_contest()) failed.push_back("fcfs");
    for (const char* preset : {"sphd20", "dphd42"}) {
      SimConfig c = preset_config(preset, 100, 21);
      c.log_messages = true;
      if (!(run(c).log == run(c).log)) failed.push_back(std::string("replay ") + preset);
    }
    if (run(preset_config("dphd42", 10, 1)).unresolved) failed.push_back("stress");
  } catch (const std::exception& e) {
    failed.push_back(e.what());
  }
  std::string what = "exclusivity, cleanup, fcfs, path consistency, replay, lambda=10 stress";
  for (const auto& f : failed) what += "; failed " + f;
  out.line(6, failed.empty(), what);

  std::uint64_t worst = 0, bound_violations = 0;
  double worst_ratio = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Topology t = random_topology(seed);
    EngineOptions opts;
    opts.log_messages = false;
    Engine e(t, opts);
    const std::uint64_t msgs = e.run_discovery();
    const double bound = 4.0 * static_cast<double>(t.nodes().size()) * static_cast<double>(t.channels().size());
    if (msgs > bound) ++bound_violations;
    if (msgs / bound > worst_ratio) worst_ratio = msgs / bound, worst = msgs;
  }
  out.line(7, bound_violations == 0,
           fmt("flooding messages within 4|V||E| on 100 random topologies, worst %.0f at %.3f of the bound",
               static_cast<double>(worst), worst_ratio));

  std::printf("%d of 7 criteria failed\n", out.failures);
  return out.failures ? 1 : 0;
}
