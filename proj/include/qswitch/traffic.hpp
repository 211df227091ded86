#ifndef QSWITCH_TRAFFIC_HPP
#define QSWITCH_TRAFFIC_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "qswitch/topology.hpp"

namespace qswitch {

/**
 * Seeded generator with a fixed algorithm: std::mt19937_64 (its output
 * sequence is pinned by the standard) plus hand-written conversions, since
 * the std:: distributions are not required to agree across library
 * implementations.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n);
  /// Exponential with the given mean.
  double exponential(double mean);

 private:
  std::mt19937_64 engine_;
};

struct TrafficRequest {
  SimTime at = 0;
  NodeId src;
  NodeId dst;

  bool operator==(const TrafficRequest&) const = default;
};

/**
 * Poisson arrivals: exponential gaps with mean `lambda`, rounded up to a
 * whole step (minimum 1); arrivals after `horizon` are cut. Each request
 * picks an ordered pair of distinct end nodes uniformly.
 */
std::vector<TrafficRequest> generate_traffic(const std::vector<NodeId>& end_nodes, double lambda,
                                             SimTime horizon, Rng& rng);

std::vector<TrafficRequest> generate_traffic(const Topology& topo, double lambda, SimTime horizon,
                                             std::uint64_t seed);

}  // namespace qswitch

#endif  // QSWITCH_TRAFFIC_HPP
