#include "qswitch/traffic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qswitch {

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below(0)");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n);
  std::uint64_t x = 0;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::exponential(double mean) { return -mean * std::log1p(-uniform01()); }

std::vector<TrafficRequest> generate_traffic(const std::vector<NodeId>& end_nodes, double lambda,
                                             SimTime horizon, Rng& rng) {
  if (end_nodes.size() < 2) throw std::invalid_argument("traffic needs at least two end nodes");
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  std::vector<TrafficRequest> out;
  SimTime t = 0;
  const auto n = static_cast<std::uint64_t>(end_nodes.size());
  while (true) {
    const double gap = std::ceil(rng.exponential(lambda));
    t += std::max<SimTime>(1, static_cast<SimTime>(gap));
    if (t > horizon) break;
    const auto a = rng.below(n);
    auto b = rng.below(n - 1);
    if (b >= a) ++b;
    out.push_back({t, end_nodes[a], end_nodes[b]});
  }
  return out;
}

std::vector<TrafficRequest> generate_traffic(const Topology& topo, double lambda, SimTime horizon,
                                             std::uint64_t seed) {
  Rng rng(seed);
  return generate_traffic(topo.nodes_of(NodeKind::EndNode), lambda, horizon, rng);
}

}  // namespace qswitch
