#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/env.hpp"
#include "codedge/policies.hpp"
#include "codedge/rng.hpp"

namespace codedge {

// Monte-Carlo estimate of the expected serving time of one action.
struct ServeEstimate {
  Action action;
  double mean_seconds = 0.0;
  double half_width_95 = 0.0;
  long long replications = 0;
};

namespace detail {

struct Welford {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double half_width_95() const {
    return n > 1 ? 1.96 * std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

inline void check_code_action(const SystemConfig& cfg, int f, const Action& a) {
  if (a.is_idle()) throw std::invalid_argument("serving time is undefined for the idle action");
  if (static_cast<int>(a.nodes.size()) != a.n || a.k < 1 || a.k > a.n)
    throw std::invalid_argument("malformed code action");
  for (int j : a.nodes)
    if (j < 0 || j >= cfg.num_nodes) throw std::invalid_argument("action node out of range");
  if (f < 1) throw std::invalid_argument("task size must be positive");
}

}  // namespace detail

// Expected serving time of a single (n, k, subset) action for an f-point
// task: mean over replications of the k-th smallest per-node serving time,
// with a normal-approximation 95% half-width.
inline ServeEstimate estimate_serving_time(const SystemConfig& cfg, int f, const Action& action,
                                           long long replications, SplitMix64& rng) {
  detail::check_code_action(cfg, f, action);
  if (replications < 100) throw std::invalid_argument("need at least 100 replications");
  const int chunk = subtask_size(f, action.k);
  detail::Welford acc;
  std::vector<double> seconds(action.nodes.size());
  for (long long r = 0; r < replications; ++r) {
    for (std::size_t i = 0; i < action.nodes.size(); ++i) {
      const int j = action.nodes[i];
      const long long h = sample_retransmissions(cfg.disconnect_probs[static_cast<std::size_t>(j)], rng);
      const double s = sample_straggle(cfg.straggle_rates[static_cast<std::size_t>(j)], rng);
      seconds[i] = subtask_serving_seconds(h, cfg.slot_seconds, s,
                                           cfg.per_point_seconds[static_cast<std::size_t>(j)], chunk);
    }
    acc.add(kth_smallest(seconds, action.k));
  }
  return ServeEstimate{action, acc.mean, acc.half_width_95(), replications};
}

// Estimates every feasible code action over `available_mask` with common
// random numbers: each replication draws one (H, straggle) pair per
// available node and every action is scored on those same draws, so
// comparisons between actions sharing nodes are low-variance and
// deterministic given the seed. Exponential in the number of available
// nodes by construction.
inline std::vector<ServeEstimate> estimate_all_actions(const SystemConfig& cfg,
                                                       const ActionSpace& space, int f,
                                                       std::uint32_t available_mask,
                                                       long long replications, SplitMix64& rng) {
  if (available_mask == 0) throw std::invalid_argument("no available nodes");
  if (replications < 100) throw std::invalid_argument("need at least 100 replications");
  if (f < 1) throw std::invalid_argument("task size must be positive");

  std::vector<const Action*> candidates;
  for (const Action& a : space.actions())
    if (!a.is_idle() && (a.node_mask & ~available_mask) == 0) candidates.push_back(&a);

  std::vector<detail::Welford> acc(candidates.size());
  std::vector<double> node_comm(static_cast<std::size_t>(cfg.num_nodes), 0.0);
  std::vector<double> node_straggle(static_cast<std::size_t>(cfg.num_nodes), 0.0);
  std::vector<double> seconds;
  for (long long r = 0; r < replications; ++r) {
    for (int j = 0; j < cfg.num_nodes; ++j) {
      if (!(available_mask & (1u << j))) continue;
      const auto idx = static_cast<std::size_t>(j);
      node_comm[idx] = 2.0 * static_cast<double>(sample_retransmissions(cfg.disconnect_probs[idx], rng)) *
                       cfg.slot_seconds;
      node_straggle[idx] = sample_straggle(cfg.straggle_rates[idx], rng);
    }
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Action& a = *candidates[c];
      const int chunk = subtask_size(f, a.k);
      seconds.clear();
      for (int j : a.nodes) {
        const auto idx = static_cast<std::size_t>(j);
        seconds.push_back(node_comm[idx] + node_straggle[idx] + cfg.per_point_seconds[idx] * chunk);
      }
      acc[c].add(kth_smallest(seconds, a.k));
    }
  }

  std::vector<ServeEstimate> out;
  out.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    out.push_back(ServeEstimate{*candidates[c], acc[c].mean, acc[c].half_width_95(), replications});
  return out;
}

// Exhaustive minimizer of estimated expected serving time over every
// feasible (n, k, subset) action. Ties break toward the lower action index.
inline ServeEstimate brute_force_argmin(const SystemConfig& cfg, const ActionSpace& space, int f,
                                        std::uint32_t available_mask, long long replications,
                                        SplitMix64& rng) {
  const std::vector<ServeEstimate> all =
      estimate_all_actions(cfg, space, f, available_mask, replications, rng);
  const ServeEstimate* best = &all.front();
  for (const ServeEstimate& e : all)
    if (e.mean_seconds < best->mean_seconds) best = &e;
  return *best;
}

// Per-task application of the serving-time minimizer: a reference decider,
// not the long-run optimum (it ignores the tasks behind the head).
class MyopicOraclePolicy : public Policy {
 public:
  MyopicOraclePolicy(const ActionSpace& space, const SystemConfig& cfg, long long replications = 10000)
      : space_(space), cfg_(cfg), replications_(replications) {}

  const Action& decide(const SystemState& state, const ActionMask&, SplitMix64& rng) override {
    if (state.head_task_size <= 0) return space_.idle();
    const std::uint32_t avail = state.availability_mask();
    if (avail == 0) return space_.idle();
    const ServeEstimate best =
        brute_force_argmin(cfg_, space_, state.head_task_size, avail, replications_, rng);
    return space_.at(best.action.global_index);
  }
  std::string name() const override { return "myopic-oracle"; }

 private:
  const ActionSpace& space_;
  const SystemConfig& cfg_;
  long long replications_;
};

}  // namespace codedge
