#pragma once

#include <cstdint>
#include <cmath>
#include <functional>

#include "codedge/agent_env.hpp"
#include "codedge/dueling.hpp"
#include "codedge/metrics.hpp"
#include "codedge/qlearning.hpp"

namespace codedge {

// Greedy-rollout evaluation used for training curves: average per-slot
// reward (the negated occupancy) on a fixed-seed environment.
template <typename Net>
double evaluate_net(const Net& net, const SystemConfig& cfg, const ActionSpace& space,
                    long long slots, std::uint64_t eval_seed) {
  DeepPolicy<Net> policy(space, cfg, net, "eval");
  const long long warmup = slots / 8;
  const RunMetrics m = evaluate_policy(cfg, space, policy, slots, warmup, eval_seed);
  return -m.avg_queue_occupancy;
}

inline std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  return SplitMix64(seed).split(salt).next_u64();
}

// Worst-case discounted return: the queue can never hold more than M tasks.
inline double return_floor(const SystemConfig& cfg, double gamma) {
  return -static_cast<double>(cfg.queue_capacity) / (1.0 - gamma);
}

// Fills in the simulator-aware pieces the generic trainer cannot know: the
// value-scale anchor (mid-scale) and the physical value box for TD targets.
inline TrainConfig resolve_sim_bounds(const SystemConfig& cfg, TrainConfig tcfg) {
  if (!std::isfinite(tcfg.value_bias_init))
    tcfg.value_bias_init = 0.5 * return_floor(cfg, tcfg.gamma);
  if (!std::isfinite(tcfg.target_floor)) tcfg.target_floor = return_floor(cfg, tcfg.gamma);
  if (!std::isfinite(tcfg.target_ceiling)) tcfg.target_ceiling = 0.0;
  return tcfg;
}

inline TrainResult<DuelingNet> train_dueling(const SystemConfig& cfg, const ActionSpace& space,
                                             const TrainConfig& tcfg_in, std::uint64_t seed) {
  const TrainConfig tcfg = resolve_sim_bounds(cfg, tcfg_in);
  AgentEnv env(cfg, space, derived_seed(seed, 1));
  SplitMix64 init_rng(derived_seed(seed, 2));
  DuelingNet net = DuelingNet::init(static_cast<int>(env.features().size()), tcfg.hidden,
                                    space.size(), init_rng);
  net.value.b[0] = tcfg.value_bias_init;
  std::function<double(const DuelingNet&)> eval;
  if (tcfg.eval_every > 0) {
    const std::uint64_t eval_seed = derived_seed(seed, 3);
    eval = [&cfg, &space, tcfg, eval_seed](const DuelingNet& n) {
      return evaluate_net(n, cfg, space, tcfg.eval_slots, eval_seed);
    };
  }
  return train_value_net(env, std::move(net), tcfg, derived_seed(seed, 4), eval);
}

inline TrainResult<PlainDqnNet> train_plain_dqn(const SystemConfig& cfg, const ActionSpace& space,
                                                const TrainConfig& tcfg_in, std::uint64_t seed) {
  const TrainConfig tcfg = resolve_sim_bounds(cfg, tcfg_in);
  AgentEnv env(cfg, space, derived_seed(seed, 1));
  SplitMix64 init_rng(derived_seed(seed, 2));
  PlainDqnNet net = PlainDqnNet::init(static_cast<int>(env.features().size()), tcfg.hidden,
                                      space.size(), init_rng);
  for (double& b : net.head.b) b = tcfg.value_bias_init;
  std::function<double(const PlainDqnNet&)> eval;
  if (tcfg.eval_every > 0) {
    const std::uint64_t eval_seed = derived_seed(seed, 3);
    eval = [&cfg, &space, tcfg, eval_seed](const PlainDqnNet& n) {
      return evaluate_net(n, cfg, space, tcfg.eval_slots, eval_seed);
    };
  }
  return train_value_net(env, std::move(net), tcfg, derived_seed(seed, 4), eval);
}

inline QTable train_tabular(const SystemConfig& cfg, const ActionSpace& space,
                            const QLearnConfig& qcfg, std::uint64_t seed) {
  AgentEnv env(cfg, space, derived_seed(seed, 1));
  QLearnConfig resolved = qcfg;
  if (!std::isfinite(resolved.initial_q)) resolved.initial_q = return_floor(cfg, qcfg.gamma);
  return train_qlearning(env, resolved, derived_seed(seed, 4));
}

}  // namespace codedge
