#include "qswitch/topology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace qswitch {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::EndNode:
      return "endnode";
    case NodeKind::Switch:
      return "switch";
    case NodeKind::Bsa:
      return "bsa";
  }
  return "?";
}

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "endnode") return NodeKind::EndNode;
  if (text == "switch") return NodeKind::Switch;
  if (text == "bsa") return NodeKind::Bsa;
  throw std::invalid_argument("unknown node kind '" + std::string(text) + "'");
}

std::string to_string(const SessionId& id) {
  return std::to_string(id.lead.value) + "." + std::to_string(id.serial);
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Out:
      return "out";
    case Direction::In:
      return "in";
    case Direction::Both:
      return "both";
  }
  return "?";
}

ParseError::ParseError(std::size_t line, std::size_t column, std::string reason)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + reason),
      line(line),
      column(column),
      reason(std::move(reason)) {}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid topology:";
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations(std::move(violations)) {}

void Topology::add_node(NodeId id, NodeKind kind) {
  if (!nodes_.emplace(id, kind).second) {
    throw std::invalid_argument("duplicate node " + std::to_string(id.value));
  }
}

void Topology::add_channel(Endpoint from, Endpoint to) {
  Channel c{from, to};
  channels_.insert(std::upper_bound(channels_.begin(), channels_.end(), c), c);
}

NodeKind Topology::kind(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNode(id);
  return it->second;
}

std::size_t Topology::count(NodeKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [kind](const auto& n) { return n.second == kind; }));
}

std::vector<NodeId> Topology::nodes_of(NodeKind kind) const {
  std::vector<NodeId> out;
  for (const auto& [id, k] : nodes_) {
    if (k == kind) out.push_back(id);
  }
  return out;
}

std::vector<Neighbor> Topology::neighbors(NodeId id) const {
  if (!contains(id)) throw UnknownNode(id);
  std::map<std::tuple<NodeId, PortId, PortId>, Direction> merged;
  auto note = [&](NodeId other, PortId local, PortId remote, Direction d) {
    auto [it, fresh] = merged.emplace(std::tuple{other, local, remote}, d);
    if (!fresh && it->second != d) it->second = Direction::Both;
  };
  for (const auto& c : channels_) {
    if (c.from.node == id) note(c.to.node, c.from.port, c.to.port, Direction::Out);
    if (c.to.node == id) note(c.from.node, c.to.port, c.from.port, Direction::In);
  }
  std::vector<Neighbor> out;
  out.reserve(merged.size());
  for (const auto& [key, d] : merged) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), d});
  }
  // std::map orders by (node, local, remote), which is the required order.
  return out;
}

std::optional<Channel> Topology::outbound(Endpoint at) const {
  for (const auto& c : channels_) {
    if (c.from == at) return c;
  }
  return std::nullopt;
}

std::optional<Channel> Topology::inbound(Endpoint at) const {
  for (const auto& c : channels_) {
    if (c.to == at) return c;
  }
  return std::nullopt;
}

std::vector<std::string> Topology::violations() const {
  std::vector<std::string> out;
  if (nodes_.empty()) out.emplace_back("no nodes declared");

  std::map<Endpoint, int> from_uses;
  std::map<Endpoint, int> to_uses;
  for (const auto& c : channels_) {
    std::ostringstream desc;
    desc << "channel " << c.from.node << ":" << c.from.port << " -> " << c.to.node << ":"
         << c.to.port;
    if (!contains(c.from.node)) out.push_back(desc.str() + " references unknown node " +
                                              std::to_string(c.from.node.value));
    if (!contains(c.to.node)) out.push_back(desc.str() + " references unknown node " +
                                            std::to_string(c.to.node.value));
    if (c.from.node == c.to.node) out.push_back(desc.str() + " is a self-loop");
    ++from_uses[c.from];
    ++to_uses[c.to];
  }
  for (const auto& [ep, n] : from_uses) {
    if (n > 1) {
      out.push_back("endpoint " + std::to_string(ep.node.value) + ":" +
                    std::to_string(ep.port.value) + " has " + std::to_string(n) +
                    " outbound channels");
    }
  }
  for (const auto& [ep, n] : to_uses) {
    if (n > 1) {
      out.push_back("endpoint " + std::to_string(ep.node.value) + ":" +
                    std::to_string(ep.port.value) + " has " + std::to_string(n) +
                    " inbound channels");
    }
  }
  for (const auto& [id, k] : nodes_) {
    if (k != NodeKind::Bsa) continue;
    std::set<PortId> ports;
    std::size_t inbound_channels = 0;
    for (const auto& c : channels_) {
      if (c.to.node == id) {
        ports.insert(c.to.port);
        ++inbound_channels;
      }
    }
    if (inbound_channels != 2 || ports.size() != 2) {
      out.push_back("bsa " + std::to_string(id.value) + " has " +
                    std::to_string(inbound_channels) + " inbound channels on " +
                    std::to_string(ports.size()) + " ports (expected 2 on 2 distinct ports)");
    }
  }
  return out;
}

std::vector<std::string> Topology::warnings() const {
  std::vector<std::string> out;
  if (nodes_.empty()) return out;
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const auto& c : channels_) {
    adj[c.from.node].push_back(c.to.node);
    adj[c.to.node].push_back(c.from.node);
  }
  std::set<NodeId> seen{nodes_.begin()->first};
  std::queue<NodeId> frontier;
  frontier.push(nodes_.begin()->first);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : adj[u]) {
      if (seen.insert(v).second) frontier.push(v);
    }
  }
  if (seen.size() != nodes_.size()) {
    out.push_back("topology is disconnected: " + std::to_string(nodes_.size() - seen.size()) +
                  " node(s) unreachable from node " +
                  std::to_string(nodes_.begin()->first.value) + "; some BSA tables will be partial");
  }
  return out;
}

void Topology::validate() const {
  auto v = violations();
  if (!v.empty()) throw ValidationError(std::move(v));
}

// --- Q-Fly ---------------------------------------------------------------

QFlyParams QFlyParams::sphd20() {
  return QFlyParams{.g = 5, .p = 5, .b = 2, .k = 6, .n_override = 20u, .label = "SPHD"};
}

QFlyParams QFlyParams::dphd42() {
  return QFlyParams{.g = 7, .p = 6, .b = 3, .k = 12, .n_override = 42u, .label = "DPHD"};
}

std::vector<unsigned> qfly_group_sizes(const QFlyParams& params) {
  if (params.g < 1 || params.p < 1 || params.b < 1) {
    throw InvalidParams("q-fly parameters g, p and b must all be >= 1");
  }
  const unsigned full = params.g * params.p;
  if (params.n_override && *params.n_override > full) {
    throw InvalidParams("n_override " + std::to_string(*params.n_override) +
                        " exceeds g*p = " + std::to_string(full));
  }
  std::vector<unsigned> sizes(params.g, params.p);
  if (params.n_override) {
    const unsigned n = *params.n_override;
    for (unsigned i = 0; i < params.g; ++i) {
      sizes[i] = n / params.g + (i < n % params.g ? 1 : 0);
    }
  }
  return sizes;
}

std::vector<std::string> qfly_warnings(const QFlyParams& params) {
  std::vector<std::string> out;
  const unsigned needed = params.p + 2 * params.b + (params.g - 1);
  if (params.k != 0 && params.k != needed) {
    out.push_back("radix k=" + std::to_string(params.k) + " differs from the " +
                  std::to_string(needed) + " switch ports this wiring uses (p + 2b + g - 1)");
  }
  return out;
}

Topology generate_qfly(const QFlyParams& params) {
  const auto sizes = qfly_group_sizes(params);
  const unsigned total = std::accumulate(sizes.begin(), sizes.end(), 0u);
  Topology topo(params.label + "-" + std::to_string(total));

  const unsigned g = params.g;
  auto switch_id = [](unsigned grp) { return NodeId{grp}; };
  auto bsa_id = [&](unsigned grp, unsigned j) { return NodeId{g + grp * params.b + j}; };
  std::vector<unsigned> first_end(g);
  {
    unsigned next = g + g * params.b;
    for (unsigned grp = 0; grp < g; ++grp) {
      first_end[grp] = next;
      next += sizes[grp];
    }
  }

  for (unsigned grp = 0; grp < g; ++grp) topo.add_node(switch_id(grp), NodeKind::Switch);
  for (unsigned grp = 0; grp < g; ++grp) {
    for (unsigned j = 0; j < params.b; ++j) topo.add_node(bsa_id(grp, j), NodeKind::Bsa);
  }
  for (unsigned grp = 0; grp < g; ++grp) {
    for (unsigned e = 0; e < sizes[grp]; ++e) {
      topo.add_node(NodeId{first_end[grp] + e}, NodeKind::EndNode);
    }
  }

  // Switch port layout: end nodes, then BSA inputs (two per BSA), then the
  // other group switches in group order.
  for (unsigned grp = 0; grp < g; ++grp) {
    const NodeId sw = switch_id(grp);
    unsigned port = 0;
    for (unsigned e = 0; e < sizes[grp]; ++e, ++port) {
      const NodeId end{first_end[grp] + e};
      topo.add_channel({sw, PortId{port}}, {end, PortId{0}});
      topo.add_channel({end, PortId{0}}, {sw, PortId{port}});
    }
    port = sizes[grp];
    for (unsigned j = 0; j < params.b; ++j) {
      for (unsigned in = 0; in < 2; ++in, ++port) {
        topo.add_channel({sw, PortId{port}}, {bsa_id(grp, j), PortId{in}});
      }
    }
    for (unsigned other = 0; other < g; ++other) {
      if (other == grp) continue;
      // Port on `grp` facing `other`, and the matching port on `other`.
      auto trunk_port = [&](unsigned at, unsigned toward) {
        return PortId{sizes[at] + 2 * params.b + (toward < at ? toward : toward - 1)};
      };
      topo.add_channel({sw, trunk_port(grp, other)}, {switch_id(other), trunk_port(other, grp)});
    }
  }
  return topo;
}

// --- file format ---------------------------------------------------------

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#') {
      ++i;
    }
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

std::uint32_t parse_uint(std::string_view s, std::size_t line, std::size_t column,
                         const char* what) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, column, std::string("expected ") + what + ", got '" +
                                       std::string(s) + "'");
  }
  return v;
}

Endpoint parse_endpoint(const Token& tok, std::size_t line) {
  auto colon = tok.text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(line, tok.column, "expected <node>:<port>, got '" + std::string(tok.text) + "'");
  }
  return {NodeId{parse_uint(tok.text.substr(0, colon), line, tok.column, "node id")},
          PortId{parse_uint(tok.text.substr(colon + 1), line, tok.column + colon + 1, "port id")}};
}

}  // namespace

Topology load_topology(std::string_view text) {
  Topology topo;
  std::vector<std::string> problems;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const auto& head = toks[0];
    if (head.text == "name") {
      if (toks.size() != 2) throw ParseError(line_no, head.column, "name takes exactly one label");
      topo.set_name(std::string(toks[1].text));
    } else if (head.text == "node") {
      if (toks.size() != 3) {
        throw ParseError(line_no, head.column, "expected: node <id> <endnode|switch|bsa>");
      }
      NodeId id{parse_uint(toks[1].text, line_no, toks[1].column, "node id")};
      NodeKind kind;
      try {
        kind = node_kind_from_string(toks[2].text);
      } catch (const std::invalid_argument&) {
        throw ParseError(line_no, toks[2].column,
                         "unknown node kind '" + std::string(toks[2].text) + "'");
      }
      if (topo.contains(id)) {
        problems.push_back("line " + std::to_string(line_no) + ": node " +
                           std::to_string(id.value) + " declared twice");
      } else {
        topo.add_node(id, kind);
      }
    } else if (head.text == "channel") {
      if (toks.size() != 4 || toks[2].text != "->") {
        throw ParseError(line_no, head.column, "expected: channel <from>:<port> -> <to>:<port>");
      }
      topo.add_channel(parse_endpoint(toks[1], line_no), parse_endpoint(toks[3], line_no));
    } else {
      throw ParseError(line_no, head.column, "unknown directive '" + std::string(head.text) + "'");
    }
  }
  auto v = topo.violations();
  problems.insert(problems.end(), v.begin(), v.end());
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return topo;
}

Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_topology(ss.str());
}

std::string serialize_topology(const Topology& topo) {
  std::ostringstream out;
  if (!topo.name().empty()) out << "name " << topo.name() << "\n";
  for (const auto& [id, kind] : topo.nodes()) out << "node " << id << " " << to_string(kind) << "\n";
  for (const auto& c : topo.channels()) {
    out << "channel " << c.from.node << ":" << c.from.port << " -> " << c.to.node << ":"
        << c.to.port << "\n";
  }
  return out.str();
}

}  // namespace qswitch
