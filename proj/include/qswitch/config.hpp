#ifndef QSWITCH_CONFIG_HPP
#define QSWITCH_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "qswitch/engine.hpp"

namespace qswitch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * `key = value` lines, `#` comments. Keys mirror SimConfig:
 *
 *   topology = sphd20 | dphd42 | qfly | <path to topology file>
 *   g, p, b, k, n            (qfly only)
 *   lambda, horizon, seed, hop_latency, grace
 *   session_hold, reconfiguration_delay, request_timeout, dequeue_delay
 *   reject_policy = next_candidate | queue
 *   addressed = direct | routed
 *   audit, log_messages = true | false
 *
 * Relative topology paths resolve against `base_dir`.
 */
SimConfig parse_config(std::string_view text, const std::string& base_dir = ".");
SimConfig load_config_file(const std::string& path);

}  // namespace qswitch

#endif  // QSWITCH_CONFIG_HPP
