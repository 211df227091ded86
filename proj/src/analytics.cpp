#include "qswitch/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace qswitch {

namespace {

std::string where(const LogRecord& r) {
  return "t=" + std::to_string(r.time) + " node=" + std::to_string(r.node.value) + " kind=" + r.kind;
}

std::uint32_t number_field(const LogRecord& r, std::string_view key) {
  auto v = detail_field(r.detail, key);
  if (!v) throw MalformedLog(where(r) + ": missing " + std::string(key));
  try {
    return static_cast<std::uint32_t>(std::stoul(*v));
  } catch (const std::exception&) {
    throw MalformedLog(where(r) + ": bad " + std::string(key) + " '" + *v + "'");
  }
}

double mean_of(const std::vector<SimTime>& xs) {
  if (xs.empty()) return 0;
  double sum = 0;
  for (auto x : xs) sum += static_cast<double>(x);
  return sum / static_cast<double>(xs.size());
}

}  // namespace

double RunSummary::expired_fraction() const {
  return requests ? static_cast<double>(expired) / static_cast<double>(requests) : 0;
}

std::size_t RunSummary::max_sessions_per_bsa() const {
  std::size_t m = 0;
  for (const auto& [bsa, n] : sessions_per_bsa) m = std::max(m, n);
  return m;
}

std::vector<SessionOutcome> session_outcomes(const EventLog& log) {
  std::vector<SessionOutcome> out;
  std::map<SessionId, std::size_t> index;
  std::map<SessionId, SimTime> first_park;

  for (const auto& r : log.records()) {
    if (!r.session || r.node != r.session->lead) continue;
    const SessionId sid = *r.session;

    if (r.kind == log_kind::kRequest) {
      if (index.contains(sid)) throw MalformedLog(where(r) + ": session " + to_string(sid) + " requested twice");
      SessionOutcome o;
      o.session = sid;
      o.peer = NodeId{number_field(r, "peer")};
      o.created_at = r.time;
      index.emplace(sid, out.size());
      out.push_back(o);
      continue;
    }

    const bool lifecycle = r.kind == log_kind::kQueued || r.kind == log_kind::kDequeued ||
                           r.kind == log_kind::kRetry || r.kind == log_kind::kActive ||
                           r.kind == log_kind::kExpired;
    if (!lifecycle) continue;
    auto it = index.find(sid);
    if (it == index.end()) throw MalformedLog(where(r) + ": session " + to_string(sid) + " was never requested");
    SessionOutcome& o = out[it->second];
    if (o.completed() || o.expired) {
      throw MalformedLog(where(r) + ": session " + to_string(sid) + " already finished");
    }

    if (r.kind == log_kind::kQueued) {
      o.queued = true;
      first_park.try_emplace(sid, r.time);
    } else if (r.kind == log_kind::kDequeued) {
      if (!o.queued) throw MalformedLog(where(r) + ": de-queued without being queued");
      o.queue_wait = r.time - first_park.at(sid);
    } else if (r.kind == log_kind::kRetry) {
      ++o.retries;
    } else if (r.kind == log_kind::kActive) {
      if (r.time < o.created_at) throw MalformedLog(where(r) + ": completed before it was created");
      o.completed_at = r.time;
      o.bsa_used = NodeId{number_field(r, "bsa")};
      o.candidates = number_field(r, "candidates");
      if (number_field(r, "retries") != o.retries) {
        throw MalformedLog(where(r) + ": retry count disagrees with retry records");
      }
    } else {
      o.expired = true;
    }
  }
  return out;
}

RunSummary summarize(const EventLog& log) {
  RunSummary s;
  s.sessions = session_outcomes(log);
  std::vector<SimTime> direct;
  std::vector<SimTime> parked;
  for (const auto& o : s.sessions) {
    ++s.requests;
    s.max_retries = std::max(s.max_retries, o.retries);
    if (o.retries > 0) ++s.retried_sessions;
    if (o.expired) {
      ++s.expired;
    } else if (!o.completed()) {
      ++s.unresolved;
    } else if (o.queued) {
      ++s.queued_completed;
      parked.push_back(o.elapsed());
    } else {
      ++s.immediate;
      direct.push_back(o.elapsed());
    }
  }
  for (const auto& r : log.records()) {
    if (r.kind == log_kind::kBsaReady) ++s.sessions_per_bsa[NodeId{number_field(r, "bsa")}];
  }
  s.completed = s.immediate + s.queued_completed;
  if (s.requests) {
    s.success_rate = static_cast<double>(s.completed) / static_cast<double>(s.requests);
    s.immediate_completion_pct = static_cast<double>(s.immediate) / static_cast<double>(s.requests);
  }
  s.mean_comp = mean_of(direct);
  s.mean_comp_queued = mean_of(parked);
  if (!direct.empty()) s.max_comp = *std::max_element(direct.begin(), direct.end());
  if (!parked.empty()) s.max_comp_queued = *std::max_element(parked.begin(), parked.end());
  return s;
}

std::string to_json(const RunSummary& s, int indent) {
  nlohmann::ordered_json j;
  j["requests"] = s.requests;
  j["completed"] = s.completed;
  j["immediate"] = s.immediate;
  j["queued_completed"] = s.queued_completed;
  j["expired"] = s.expired;
  j["unresolved"] = s.unresolved;
  j["success_rate"] = s.success_rate;
  j["immediate_completion_pct"] = s.immediate_completion_pct;
  j["mean_comp"] = s.mean_comp;
  j["max_comp"] = s.max_comp;
  j["mean_comp_queued"] = s.mean_comp_queued;
  j["max_comp_queued"] = s.max_comp_queued;
  j["max_retries"] = s.max_retries;
  j["retried_sessions"] = s.retried_sessions;
  auto& per_bsa = j["sessions_per_bsa"] = nlohmann::ordered_json::object();
  for (const auto& [bsa, n] : s.sessions_per_bsa) per_bsa[std::to_string(bsa.value)] = n;
  return j.dump(indent);
}

std::string format_summary(const RunSummary& s) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "requests            " << s.requests << "\n"
    << "success rate        " << 100 * s.success_rate << "%\n"
    << "immediate           " << 100 * s.immediate_completion_pct << "% (" << s.immediate << ")\n"
    << "queued, completed   " << s.queued_completed << "\n"
    << "expired             " << s.expired << "\n"
    << "unresolved          " << s.unresolved << "\n"
    << "mean comp           " << s.mean_comp << " (max " << s.max_comp << ")\n"
    << "mean comp (queued)  " << s.mean_comp_queued << " (max " << s.max_comp_queued << ")\n"
    << "max retries         " << s.max_retries << "\n"
    << "busiest BSA         " << s.max_sessions_per_bsa() << " sessions\n";
  return o.str();
}

std::vector<SweepRow> sweep(const std::vector<SimConfig>& configs, unsigned threads) {
  std::vector<SweepRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const auto& c = configs[i];
      SweepRow& row = rows[i];
      row.lambda = c.lambda;
      row.seed = c.seed;
      try {
        row.topology = c.build_topology().name();
        RunResult r = run(c);
        row.summary = summarize(r.log);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << "\n";
  for (const auto& row : rows) {
    out << row.topology << ',' << row.lambda << ',' << row.seed << ',';
    if (!row.summary) {
      out << ",,,,,,\n";
      continue;
    }
    const auto& s = *row.summary;
    out << s.requests << ',' << s.success_rate << ',' << s.immediate_completion_pct << ','
        << s.mean_comp << ',' << s.mean_comp_queued << ',' << s.max_retries << ',' << s.expired
        << "\n";
  }
}

}  // namespace qswitch
