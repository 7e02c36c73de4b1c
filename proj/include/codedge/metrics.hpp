#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/env.hpp"
#include "codedge/policies.hpp"

namespace codedge {

struct RunMetrics {
  double avg_queue_occupancy = 0.0;  // resident tasks per slot
  double drop_rate = 0.0;            // drops per slot
  double drops_per_arrival = 0.0;
  double avg_delay_slots = 0.0;  // completion - arrival, mean over completed tasks
  double avg_delay_seconds = 0.0;
  double throughput = 0.0;  // completions per slot
  long long slots_run = 0;
  long long warmup_slots = 0;
  std::uint64_t seed = 0;
};

// Occupancy should match throughput x delay on long stationary runs.
inline double littles_law_residual(const RunMetrics& m) {
  if (m.avg_queue_occupancy <= 0.0) return 0.0;
  return std::abs(m.avg_queue_occupancy - m.throughput * m.avg_delay_slots) /
         m.avg_queue_occupancy;
}

// Runs `policy` for total_slots slots and reports metrics over the
// post-warmup window. The policy's RNG is derived from the run seed, so the
// whole evaluation is reproducible bit-for-bit.
inline RunMetrics evaluate_policy(const SystemConfig& cfg, const ActionSpace& space,
                                  Policy& policy, long long total_slots, long long warmup,
                                  std::uint64_t seed) {
  if (!(total_slots > warmup && warmup >= 0))
    throw std::invalid_argument("evaluate_policy needs total_slots > warmup >= 0");

  Environment env(cfg, seed);
  SplitMix64 policy_rng = SplitMix64(seed).split(0x90110c);

  SystemState state = env.state();
  double occupancy_sum = 0.0;
  long long drops = 0;
  long long completions = 0;
  long long arrivals_at_warmup = 0;
  long long arrivals_end = 0;
  double delay_sum_slots = 0.0;

  for (long long t = 0; t < total_slots; ++t) {
    if (t == warmup) arrivals_at_warmup = static_cast<long long>(env.arrivals());
    const ActionMask mask = space.feasibility(state);
    const Action& action = policy.decide(state, mask, policy_rng);
    StepOutcome out = env.step(action);
    if (t >= warmup) {
      occupancy_sum += static_cast<double>(-out.reward);
      drops += out.dropped_this_slot;
      for (const CompletedTask& c : out.completed) {
        ++completions;
        delay_sum_slots += static_cast<double>(c.completion_slot - c.arrival_slot);
      }
    }
    state = std::move(out.next_state);
  }
  arrivals_end = static_cast<long long>(env.arrivals());

  const auto window = static_cast<double>(total_slots - warmup);
  RunMetrics m;
  m.slots_run = total_slots;
  m.warmup_slots = warmup;
  m.seed = seed;
  m.avg_queue_occupancy = occupancy_sum / window;
  m.drop_rate = static_cast<double>(drops) / window;
  const long long window_arrivals = arrivals_end - arrivals_at_warmup;
  m.drops_per_arrival =
      window_arrivals > 0 ? static_cast<double>(drops) / static_cast<double>(window_arrivals) : 0.0;
  m.throughput = static_cast<double>(completions) / window;
  m.avg_delay_slots = completions > 0 ? delay_sum_slots / static_cast<double>(completions) : 0.0;
  m.avg_delay_seconds = m.avg_delay_slots * cfg.slot_seconds;
  return m;
}

}  // namespace codedge
