#ifndef QSWITCH_ANALYTICS_HPP
#define QSWITCH_ANALYTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qswitch/engine.hpp"
#include "qswitch/event_log.hpp"

namespace qswitch {

class MalformedLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionOutcome {
  SessionId session;
  NodeId peer;
  SimTime created_at = 0;
  std::optional<SimTime> completed_at;
  bool queued = false;
  SimTime queue_wait = 0;  ///< first park to last resume
  std::uint32_t retries = 0;
  std::uint32_t candidates = 0;  ///< candidate list length of the completing activation
  std::optional<NodeId> bsa_used;
  bool expired = false;

  bool completed() const { return completed_at.has_value(); }
  SimTime elapsed() const { return completed_at ? *completed_at - created_at : 0; }
};

/// Rates are fractions in [0, 1]. Means over an empty set are 0.
struct RunSummary {
  std::size_t requests = 0;
  std::size_t completed = 0;
  std::size_t immediate = 0;         ///< completed without ever being parked
  std::size_t queued_completed = 0;  ///< completed after at least one park
  std::size_t expired = 0;
  std::size_t unresolved = 0;  ///< neither completed nor expired
  double success_rate = 0;
  double immediate_completion_pct = 0;
  double mean_comp = 0;  ///< sessions never parked
  SimTime max_comp = 0;
  double mean_comp_queued = 0;  ///< parked sessions, de-queue delay included
  SimTime max_comp_queued = 0;
  std::uint32_t max_retries = 0;
  std::size_t retried_sessions = 0;
  std::map<NodeId, std::size_t> sessions_per_bsa;
  std::vector<SessionOutcome> sessions;

  double expired_fraction() const;
  std::size_t max_sessions_per_bsa() const;
};

/// Per-session outcomes in order of request.
std::vector<SessionOutcome> session_outcomes(const EventLog& log);

/// Throws MalformedLog on records that contradict the session lifecycle.
RunSummary summarize(const EventLog& log);

std::string to_json(const RunSummary& summary, int indent = 2);
std::string format_summary(const RunSummary& summary);

struct SweepRow {
  std::string topology;
  double lambda = 0;
  std::uint64_t seed = 0;
  std::optional<RunSummary> summary;
  std::string error;  ///< set when the run threw
};

/// Runs every config, `threads` at a time (0 means hardware concurrency).
/// A failing run yields a row with `error` set; the rest still run.
std::vector<SweepRow> sweep(const std::vector<SimConfig>& configs, unsigned threads = 0);

inline constexpr const char* kCsvHeader =
    "topology,lambda,seed,requests,success_rate,immediate_pct,mean_comp,mean_comp_queued,"
    "max_retries,expired";

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace qswitch

#endif  // QSWITCH_ANALYTICS_HPP
