#pragma once

#include <cstdint>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/env.hpp"
#include "codedge/qlearning.hpp"

namespace codedge {

// Exposes the simulator through the trainer-facing concept: global action
// indices in, scalar rewards out, plus the current mask, feature vector, and
// discrete state key.
class AgentEnv {
 public:
  AgentEnv(const SystemConfig& cfg, const ActionSpace& space, std::uint64_t seed)
      : env_(cfg, seed), space_(space) {
    refresh(env_.state());
  }

  int action_count() const { return space_.size(); }
  const ActionMask& feasible() const { return mask_; }
  const std::vector<double>& features() const { return features_; }
  TabularKey state_key() const { return TabularKey::of(state_); }
  const SystemState& state() const { return state_; }

  double step(int action_index) {
    StepOutcome out = env_.step(space_.at(action_index));
    refresh(std::move(out.next_state));
    return out.reward;
  }

  Environment& env() { return env_; }
  const Environment& env() const { return env_; }

 private:
  void refresh(SystemState next) {
    state_ = std::move(next);
    mask_ = space_.feasibility(state_);
    features_ = state_features(state_, env_.config());
  }

  Environment env_;
  const ActionSpace& space_;
  SystemState state_;
  ActionMask mask_;
  std::vector<double> features_;
};

}  // namespace codedge
