#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace codedge {

// Environment parameters: the node/link vectors, the queue, and the slot
// clock. Node j is reachable over a link that drops with probability
// disconnect_probs[j] per slot, straggles with Exp(straggle_rates[j])
// seconds, and processes one data point in per_point_seconds[j] seconds.
struct SystemConfig {
  int num_nodes = 5;
  int queue_capacity = 10;
  double arrival_prob = 0.7;
  double slot_seconds = 12.0;
  std::vector<int> task_sizes = {100, 200, 300};
  std::vector<double> disconnect_probs = {0.1, 0.5, 0.2, 0.3, 0.9};
  std::vector<double> straggle_rates = {0.1, 1.0, 0.5, 0.2, 2.0};
  std::vector<double> per_point_seconds = {0.005, 0.005, 0.005, 0.005, 0.005};
  int f_max = 300;

  void validate() const {
    if (num_nodes < 1) throw std::invalid_argument("num_nodes must be positive");
    if (queue_capacity < 1) throw std::invalid_argument("queue_capacity must be positive");
    if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0))
      throw std::invalid_argument("arrival_prob must lie in [0, 1]");
    if (!(slot_seconds > 0.0)) throw std::invalid_argument("slot_seconds must be positive");
    if (task_sizes.empty()) throw std::invalid_argument("task_sizes must be non-empty");
    for (int s : task_sizes)
      if (s < 1) throw std::invalid_argument("task sizes must be positive");
    const auto n = static_cast<std::size_t>(num_nodes);
    if (disconnect_probs.size() != n || straggle_rates.size() != n ||
        per_point_seconds.size() != n)
      throw std::invalid_argument("per-node vectors must have length num_nodes");
    for (double p : disconnect_probs)
      if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("disconnect probabilities must lie in [0, 1)");
    for (double r : straggle_rates)
      if (!(r > 0.0)) throw std::invalid_argument("straggle rates must be positive");
    for (double e : per_point_seconds)
      if (!(e >= 0.0)) throw std::invalid_argument("per-point seconds must be non-negative");
    if (f_max < *std::max_element(task_sizes.begin(), task_sizes.end()))
      throw std::invalid_argument("f_max must cover the largest task size");
  }
};

// MDP state: queue occupancy (all resident tasks, dispatched or not), the
// size of the next undispatched task (0 if none), and per-node availability.
struct SystemState {
  int queue_count = 0;
  int head_task_size = 0;
  std::vector<std::uint8_t> node_available;

  std::uint32_t availability_mask() const {
    std::uint32_t m = 0;
    for (std::size_t j = 0; j < node_available.size(); ++j)
      if (node_available[j]) m |= (1u << j);
    return m;
  }

  bool operator==(const SystemState&) const = default;
};

}  // namespace codedge
