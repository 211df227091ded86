#ifndef QSWITCH_EVENT_LOG_HPP
#define QSWITCH_EVENT_LOG_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qswitch/types.hpp"

namespace qswitch {

/// Record kinds written by the engine and the node state machines.
namespace log_kind {
inline constexpr std::string_view kSend = "send";
inline constexpr std::string_view kRecv = "recv";
inline constexpr std::string_view kState = "state";
inline constexpr std::string_view kRequest = "request";
inline constexpr std::string_view kQueued = "queued";
inline constexpr std::string_view kDequeued = "dequeued";
inline constexpr std::string_view kRetry = "retry";
inline constexpr std::string_view kActive = "active";
inline constexpr std::string_view kEnd = "end";
inline constexpr std::string_view kExpired = "expired";
inline constexpr std::string_view kBsaReady = "bsa_ready";
inline constexpr std::string_view kReserve = "reserve";
inline constexpr std::string_view kReject = "reject";
inline constexpr std::string_view kRelease = "release";
inline constexpr std::string_view kDiscoveryDone = "discovery_done";
}  // namespace log_kind

struct LogRecord {
  SimTime time = 0;
  NodeId node;
  std::optional<SessionId> session;
  std::string kind;
  std::string detail;

  bool operator==(const LogRecord&) const = default;
};

class EventLog {
 public:
  void append(LogRecord rec) { records_.push_back(std::move(rec)); }
  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// One JSON object per line: {"t":..,"node":..,"session":"lead.serial"|null,"kind":..,"detail":..}
  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  static EventLog read_jsonl(std::istream& in);

  bool operator==(const EventLog&) const = default;

 private:
  std::vector<LogRecord> records_;
};

/// Parses "lead.serial".
SessionId parse_session_id(std::string_view text);

/// Value of `key=` inside a space separated detail string.
std::optional<std::string> detail_field(std::string_view detail, std::string_view key);

}  // namespace qswitch

#endif  // QSWITCH_EVENT_LOG_HPP
