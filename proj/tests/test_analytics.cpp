#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "support.hpp"

using namespace qswitch;
using namespace qswitch::testing;

namespace {

LogRecord rec(SimTime t, unsigned node, std::optional<SessionId> s, std::string_view kind, std::string detail) {
  return LogRecord{t, NodeId{node}, s, std::string(kind), std::move(detail)};
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("a single uncontested session") {
  const SessionId s{NodeId{1}, 0};
  EventLog log;
  log.append(rec(100, 1, s, log_kind::kRequest, "peer=2"));
  log.append(rec(111, 1, s, log_kind::kActive, "bsa=9 retries=0 candidates=2 elapsed=11"));
  log.append(rec(111, 9, s, log_kind::kBsaReady, "bsa=9"));
  auto sum = summarize(log);
  CHECK(sum.requests == 1);
  CHECK(sum.immediate_completion_pct == 1.0);
  CHECK(sum.success_rate == 1.0);
  CHECK(sum.mean_comp == 11.0);
  CHECK(sum.mean_comp_queued == 0.0);
  CHECK(sum.sessions_per_bsa.at(NodeId{9}) == 1);
  REQUIRE(sum.sessions.size() == 1);
  CHECK(sum.sessions[0].queue_wait == 0);
}

TEST_CASE("queued, retried and expired sessions") {
  const SessionId a{NodeId{1}, 0}, b{NodeId{1}, 1}, c{NodeId{3}, 0};
  EventLog log;
  log.append(rec(0, 1, a, log_kind::kRequest, "peer=2"));
  log.append(rec(1, 1, b, log_kind::kRequest, "peer=3"));
  log.append(rec(1, 1, b, log_kind::kQueued, "reason=lead_busy"));
  log.append(rec(2, 3, c, log_kind::kRequest, "peer=4"));
  log.append(rec(5, 1, a, log_kind::kRetry, "attempt=1 rejecting=7 retries=1"));
  log.append(rec(12, 1, a, log_kind::kActive, "bsa=9 retries=1 candidates=4 elapsed=12"));
  log.append(rec(30, 1, b, log_kind::kDequeued, "waited=29"));
  log.append(rec(41, 1, b, log_kind::kActive, "bsa=9 retries=0 candidates=2 elapsed=40"));
  log.append(rec(20'000, 3, c, log_kind::kExpired, "waited=19998"));
  auto s = summarize(log);
  CHECK(s.requests == 3);
  CHECK(s.immediate == 1);
  CHECK(s.queued_completed == 1);
  CHECK(s.expired == 1);
  CHECK(s.requests == s.immediate + s.queued_completed + s.expired);
  CHECK(s.success_rate == doctest::Approx(2.0 / 3));
  CHECK(s.success_rate + s.expired_fraction() == doctest::Approx(1.0));
  CHECK(s.max_retries == 1);
  CHECK(s.mean_comp == 12.0);
  CHECK(s.mean_comp_queued == 40.0);
  CHECK(s.sessions[1].queue_wait == 29);
}

TEST_CASE("malformed logs are refused") {
  const SessionId s{NodeId{1}, 0};
  EventLog orphan;
  orphan.append(rec(5, 1, s, log_kind::kActive, "bsa=9 retries=0 candidates=2"));
  CHECK_THROWS_AS(summarize(orphan), MalformedLog);

  EventLog twice;
  twice.append(rec(0, 1, s, log_kind::kRequest, "peer=2"));
  twice.append(rec(1, 1, s, log_kind::kRequest, "peer=2"));
  CHECK_THROWS_AS(summarize(twice), MalformedLog);

  EventLog backwards;
  backwards.append(rec(10, 1, s, log_kind::kRequest, "peer=2"));
  backwards.append(rec(5, 1, s, log_kind::kActive, "bsa=9 retries=0 candidates=2"));
  CHECK_THROWS_AS(summarize(backwards), MalformedLog);

  EventLog missing;
  missing.append(rec(0, 1, s, log_kind::kRequest, "peer=2"));
  missing.append(rec(5, 1, s, log_kind::kActive, "retries=0 candidates=2"));
  CHECK_THROWS_AS(summarize(missing), MalformedLog);

  EventLog disagree;
  disagree.append(rec(0, 1, s, log_kind::kRequest, "peer=2"));
  disagree.append(rec(5, 1, s, log_kind::kActive, "bsa=9 retries=3 candidates=2"));
  CHECK_THROWS_AS(summarize(disagree), MalformedLog);
}

TEST_CASE("jsonl round trip keeps the summary") {
  SimConfig c = preset_config("sphd20", 100, 2);
  c.log_messages = true;
  RunResult r = run(c);
  std::stringstream buf;
  r.log.write_jsonl(buf);
  EventLog back = EventLog::read_jsonl(buf);
  CHECK(back == r.log);
  CHECK(to_json(summarize(back)) == to_json(summarize(r.log)));
}

TEST_CASE("summary JSON carries every field") {
  auto j = nlohmann::json::parse(to_json(summarize(run(preset_config("sphd20", 100, 4)).log)));
  for (const char* key : {"requests", "success_rate", "immediate_completion_pct", "mean_comp", "max_comp",
                          "mean_comp_queued", "max_comp_queued", "max_retries", "sessions_per_bsa", "expired"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("uncontested completion is never below the handshake minimum") {
  // Request, table, target and ack take four one-way trips, each end's
  // reservation a round trip over its path, then start proposal and ack.
  for (const char* preset : {"sphd20", "dphd42"}) {
    SimConfig c = preset_config(preset, 100, 5);
    Topology t = c.build_topology();
    auto db = full_database(t);
    auto s = summarize(run(c).log);
    for (const auto& o : s.sessions) {
      if (!o.completed() || o.queued) continue;
      auto candidates = merge_tables(compute_bsa_table(db, o.session.lead), compute_bsa_table(db, o.peer));
      REQUIRE_FALSE(candidates.empty());
      SimTime minimum = std::numeric_limits<SimTime>::max();
      auto ta = compute_bsa_table(db, o.session.lead), tb = compute_bsa_table(db, o.peer);
      for (const auto& m : candidates) {
        SimTime ca = ta.find(m.bsa, m.port_for_lead)->cost, cb = tb.find(m.bsa, m.port_for_peer)->cost;
        minimum = std::min(minimum, 6 + 2 * std::max(ca, cb));
      }
      CHECK(o.elapsed() >= minimum);
    }
  }
}

TEST_CASE("retries never exceed the candidate list") {
  auto s = summarize(run(preset_config("dphd42", 75, 1)).log);
  for (const auto& o : s.sessions) {
    if (o.completed()) CHECK(o.retries <= o.candidates);
  }
}

TEST_CASE("sweep tabulates every config and survives failures") {
  std::vector<SimConfig> configs;
  for (const char* preset : {"sphd20", "dphd42"}) {
    for (double lambda : {75.0, 100.0, 150.0}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) configs.push_back(preset_config(preset, lambda, seed));
    }
  }
  auto rows = sweep(configs, 4);
  CHECK(rows.size() == 30);
  for (const auto& row : rows) CHECK(row.error.empty());

  std::ostringstream csv;
  write_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "topology,lambda,seed,requests,success_rate,immediate_pct,mean_comp,mean_comp_queued,max_retries,expired");
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 30);

  SimConfig bad = preset_config("sphd20", 100, 1);
  bad.lambda = -1;
  auto mixed = sweep({bad, preset_config("sphd20", 100, 1)}, 2);
  CHECK_FALSE(mixed[0].error.empty());
  CHECK(mixed[1].summary.has_value());
}

TEST_CASE("sweep results do not depend on the thread count") {
  std::vector<SimConfig> configs;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) configs.push_back(preset_config("dphd42", 100, seed));
  auto one = sweep(configs, 1), many = sweep(configs, 6);
  for (std::size_t i = 0; i < configs.size(); ++i) CHECK(to_json(*one[i].summary) == to_json(*many[i].summary));
}

TEST_CASE("heavy DPHD-42 load concentrates sessions on some BSAs") {
  auto s = summarize(run(preset_config("dphd42", 75, 1)).log);
  CHECK(s.max_sessions_per_bsa() >= 10);
  std::size_t served = 0;
  for (const auto& [bsa, n] : s.sessions_per_bsa) served += n;
  CHECK(served == s.completed);
}

}  // TEST_SUITE
