#include "qswitch/messages.hpp"

#include <sstream>

namespace qswitch {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view kind_name(const MessageBody& body) {
  return std::visit(
      overloaded{
          [](const LinkStateAnnouncement&) { return std::string_view("LinkStateAnnouncement"); },
          [](const RequestBsaTable&) { return std::string_view("RequestBsaTable"); },
          [](const BsaTableResponse&) { return std::string_view("BsaTableResponse"); },
          [](const TargetSelection&) { return std::string_view("TargetSelection"); },
          [](const TargetAck&) { return std::string_view("TargetAck"); },
          [](const RouteReserveRequest&) { return std::string_view("RouteReserveRequest"); },
          [](const RouteReserveAck&) { return std::string_view("RouteReserveAck"); },
          [](const RouteReserveReject&) { return std::string_view("RouteReserveReject"); },
          [](const ReleaseResources&) { return std::string_view("ReleaseResources"); },
          [](const ReservationComplete&) { return std::string_view("ReservationComplete"); },
          [](const ProposeStartTime&) { return std::string_view("ProposeStartTime"); },
          [](const StartTimeAck&) { return std::string_view("StartTimeAck"); },
          [](const RequestQueuedNotice&) { return std::string_view("RequestQueuedNotice"); },
      },
      body);
}

std::optional<SessionId> session_of(const MessageBody& body) {
  return std::visit(
      overloaded{
          [](const LinkStateAnnouncement&) -> std::optional<SessionId> { return std::nullopt; },
          [](const auto& m) -> std::optional<SessionId> { return m.session; },
      },
      body);
}

std::string describe(const Message& msg) {
  std::ostringstream out;
  out << kind_name(msg.body) << " " << msg.src << "->" << msg.dst;
  std::visit(overloaded{
                 [&](const LinkStateAnnouncement& m) {
                   out << " origin=" << m.origin << " seq=" << m.seq;
                 },
                 [&](const BsaTableResponse& m) { out << " entries=" << m.table.entries.size(); },
                 [&](const TargetSelection& m) {
                   out << " attempt=" << m.attempt << " bsa=" << m.bsa
                       << " port=" << m.port_for_receiver << " rank=" << m.candidate_rank;
                 },
                 [&](const RouteReserveRequest& m) {
                   out << " attempt=" << m.attempt << " bsa=" << m.bsa << " port=" << m.bsa_port
                       << " requester=" << m.requester;
                 },
                 [&](const RouteReserveReject& m) {
                   out << " attempt=" << m.attempt << " requester=" << m.requester
                       << " rejecting=" << m.rejecting_node;
                 },
                 [&](const ProposeStartTime& m) {
                   out << " attempt=" << m.attempt << " start=" << m.start_time;
                 },
                 [&](const RequestQueuedNotice&) {},
                 [&](const RequestBsaTable&) {},
                 [&](const auto& m) { out << " attempt=" << m.attempt; },
             },
             msg.body);
  return out.str();
}

}  // namespace qswitch
