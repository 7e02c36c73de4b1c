#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/env.hpp"
#include "codedge/lambert.hpp"
#include "codedge/rng.hpp"

namespace codedge {

// A decider. Implementations are stateless apart from the caller-supplied
// RNG and must only ever return actions the mask marks feasible.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const Action& decide(const SystemState& state, const ActionMask& mask,
                               SplitMix64& rng) = 0;
  virtual std::string name() const = 0;
};

inline std::vector<int> available_nodes(const SystemState& state) {
  std::vector<int> free_nodes;
  for (std::size_t j = 0; j < state.node_available.size(); ++j)
    if (state.node_available[j]) free_nodes.push_back(static_cast<int>(j));
  return free_nodes;
}

// Static-optimal code fraction: k = [1 + 1/W_{-1}(-e^(-rate-1))] * available,
// rounded to nearest (ties up) and clamped to [1, available].
inline int static_optimal_k(int available_count, double lambda_hat) {
  if (available_count < 1) throw std::invalid_argument("static_optimal_k needs >= 1 node");
  if (!(lambda_hat > 0.0)) throw std::invalid_argument("lambda_hat must be positive");
  const double w = lambert_w_minus1(-std::exp(-lambda_hat - 1.0));
  const double ratio = 1.0 + 1.0 / w;
  const int k = static_cast<int>(std::floor(ratio * available_count + 0.5));
  return std::clamp(k, 1, available_count);
}

// Grabs every free node and waits for all of them (k = n): the uncoded
// fully-distributed strawman.
class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(const ActionSpace& space) : space_(space) {}
  const Action& decide(const SystemState& state, const ActionMask&, SplitMix64&) override {
    if (state.head_task_size <= 0) return space_.idle();
    const std::uint32_t avail = state.availability_mask();
    if (avail == 0) return space_.idle();
    const int n = std::popcount(avail);
    return space_.at(space_.index_of(n, n, avail));
  }
  std::string name() const override { return "greedy"; }

 private:
  const ActionSpace& space_;
};

// One uniformly random free node, uncoded: the non-distributed strawman.
class OneNodePolicy : public Policy {
 public:
  explicit OneNodePolicy(const ActionSpace& space) : space_(space) {}
  const Action& decide(const SystemState& state, const ActionMask&, SplitMix64& rng) override {
    if (state.head_task_size <= 0) return space_.idle();
    const std::vector<int> free_nodes = available_nodes(state);
    if (free_nodes.empty()) return space_.idle();
    const int j = free_nodes[rng.next_below(free_nodes.size())];
    return space_.at(space_.index_of(1, 1, 1u << j));
  }
  std::string name() const override { return "onenode"; }

 private:
  const ActionSpace& space_;
};

enum class LambdaHatScope { AvailableNodes, AllNodes };

// (n = all free, k = static_optimal_k) with the straggle rate averaged over
// either the currently free nodes or the whole fleet.
class StaticCodePolicy : public Policy {
 public:
  StaticCodePolicy(const ActionSpace& space, const SystemConfig& cfg,
                   LambdaHatScope scope = LambdaHatScope::AvailableNodes)
      : space_(space), cfg_(cfg), scope_(scope) {}

  const Action& decide(const SystemState& state, const ActionMask&, SplitMix64&) override {
    if (state.head_task_size <= 0) return space_.idle();
    const std::vector<int> free_nodes = available_nodes(state);
    if (free_nodes.empty()) return space_.idle();
    double lambda_hat = 0.0;
    if (scope_ == LambdaHatScope::AvailableNodes) {
      for (int j : free_nodes) lambda_hat += cfg_.straggle_rates[static_cast<std::size_t>(j)];
      lambda_hat /= static_cast<double>(free_nodes.size());
    } else {
      for (double r : cfg_.straggle_rates) lambda_hat += r;
      lambda_hat /= static_cast<double>(cfg_.straggle_rates.size());
    }
    const int n = static_cast<int>(free_nodes.size());
    const int k = static_optimal_k(n, lambda_hat);
    return space_.at(space_.index_of(n, k, state.availability_mask()));
  }
  std::string name() const override { return "static"; }

 private:
  const ActionSpace& space_;
  const SystemConfig& cfg_;
  LambdaHatScope scope_;
};

// Uniform over whatever the mask allows.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(const ActionSpace& space) : space_(space) {}
  const Action& decide(const SystemState&, const ActionMask& mask, SplitMix64& rng) override {
    feasible_.clear();
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) feasible_.push_back(static_cast<int>(i));
    return space_.at(feasible_[rng.next_below(feasible_.size())]);
  }
  std::string name() const override { return "random"; }

 private:
  const ActionSpace& space_;
  std::vector<int> feasible_;
};

}  // namespace codedge
