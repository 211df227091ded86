#include "qswitch/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace qswitch {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad value for " + key + ": '" + value + "'");
}

}  // namespace

SimConfig parse_config(std::string_view text, const std::string& base_dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
  }

  SimConfig cfg;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  const std::string topo = take("topology").value_or("sphd20");
  if (topo == "sphd20" || topo == "dphd42" || topo == "qfly") {
    QFlyParams p = topo == "dphd42" ? QFlyParams::dphd42() : QFlyParams::sphd20();
    if (topo == "qfly") p = QFlyParams{};
    if (auto v = take("g")) p.g = number<std::uint32_t>("g", *v);
    if (auto v = take("p")) p.p = number<std::uint32_t>("p", *v);
    if (auto v = take("b")) p.b = number<std::uint32_t>("b", *v);
    if (auto v = take("k")) p.k = number<std::uint32_t>("k", *v);
    if (auto v = take("n")) p.n_override = number<std::uint32_t>("n", *v);
    cfg.topology = p;
  } else {
    std::filesystem::path path(topo);
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    cfg.topology = load_topology_file(path.string());
  }

  if (auto v = take("lambda")) cfg.lambda = number<double>("lambda", *v);
  if (auto v = take("horizon")) cfg.horizon = number<SimTime>("horizon", *v);
  if (auto v = take("seed")) cfg.seed = number<std::uint64_t>("seed", *v);
  if (auto v = take("hop_latency")) cfg.hop_latency = number<SimTime>("hop_latency", *v);
  if (auto v = take("grace")) cfg.grace = number<SimTime>("grace", *v);
  if (auto v = take("session_hold")) cfg.protocol.session_hold = number<SimTime>("session_hold", *v);
  if (auto v = take("reconfiguration_delay")) {
    cfg.protocol.reconfiguration_delay = number<SimTime>("reconfiguration_delay", *v);
  }
  if (auto v = take("request_timeout")) cfg.protocol.request_timeout = number<SimTime>("request_timeout", *v);
  if (auto v = take("dequeue_delay")) cfg.protocol.dequeue_delay = number<SimTime>("dequeue_delay", *v);
  try {
    if (auto v = take("reject_policy")) cfg.protocol.reject_policy = reject_policy_from_string(*v);
    if (auto v = take("addressed")) cfg.addressed = addressed_delivery_from_string(*v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (auto v = take("audit")) cfg.audit = boolean("audit", *v);
  if (auto v = take("log_messages")) cfg.log_messages = boolean("log_messages", *v);

  if (!kv.empty()) throw ConfigError("unknown key: " + kv.begin()->first);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::path(path).parent_path().string().empty()
                                     ? "."
                                     : std::filesystem::path(path).parent_path().string());
}

}  // namespace qswitch
