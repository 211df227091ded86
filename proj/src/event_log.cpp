#include "qswitch/event_log.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace qswitch {

void EventLog::write_jsonl(std::ostream& out) const {
  for (const auto& r : records_) {
    nlohmann::json j;
    j["t"] = r.time;
    j["node"] = r.node.value;
    j["session"] = r.session ? nlohmann::json(to_string(*r.session)) : nlohmann::json(nullptr);
    j["kind"] = r.kind;
    j["detail"] = r.detail;
    out << j.dump() << '\n';
  }
}

std::string EventLog::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

EventLog EventLog::read_jsonl(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LogRecord r;
      r.time = j.at("t").get<SimTime>();
      r.node = NodeId{j.at("node").get<std::uint32_t>()};
      if (!j.at("session").is_null()) r.session = parse_session_id(j.at("session").get<std::string>());
      r.kind = j.at("kind").get<std::string>();
      r.detail = j.at("detail").get<std::string>();
      log.append(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

SessionId parse_session_id(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    throw std::invalid_argument("bad session id '" + std::string(text) + "'");
  }
  std::uint32_t lead = 0;
  std::uint32_t serial = 0;
  auto a = std::from_chars(text.data(), text.data() + dot, lead);
  auto b = std::from_chars(text.data() + dot + 1, text.data() + text.size(), serial);
  if (a.ec != std::errc{} || a.ptr != text.data() + dot || b.ec != std::errc{} ||
      b.ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad session id '" + std::string(text) + "'");
  }
  return SessionId{NodeId{lead}, serial};
}

std::optional<std::string> detail_field(std::string_view detail, std::string_view key) {
  std::size_t pos = 0;
  while (pos < detail.size()) {
    auto end = detail.find(' ', pos);
    if (end == std::string_view::npos) end = detail.size();
    auto tok = detail.substr(pos, end - pos);
    if (tok.size() > key.size() && tok.substr(0, key.size()) == key && tok[key.size()] == '=') {
      return std::string(tok.substr(key.size() + 1));
    }
    pos = end + 1;
  }
  return std::nullopt;
}

}  // namespace qswitch
