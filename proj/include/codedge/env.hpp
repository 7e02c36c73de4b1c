#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/rng.hpp"

namespace codedge {

// k-th smallest element, 1-based, duplicates counted with multiplicity.
template <typename T>
T kth_smallest(std::vector<T> values, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > values.size())
    throw std::out_of_range("kth_smallest: k outside [1, |values|]");
  auto nth = values.begin() + (k - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

// Wall-clock seconds to serve one coded chunk at a node: round trip of H
// slot-long transmissions each way, plus the stochastic straggle, plus the
// deterministic per-point processing.
inline double subtask_serving_seconds(long long retransmissions, double slot_seconds,
                                      double straggle_seconds, double per_point_seconds,
                                      int chunk_size) {
  if (retransmissions < 1) throw std::invalid_argument("retransmission count must be >= 1");
  if (chunk_size < 1) throw std::invalid_argument("chunk size must be >= 1");
  return 2.0 * static_cast<double>(retransmissions) * slot_seconds + straggle_seconds +
         per_point_seconds * chunk_size;
}

// Continuous serving seconds quantized to whole slots, at least one.
inline std::int64_t serving_slots(double seconds, double slot_seconds) {
  const double ratio = seconds / slot_seconds;
  const auto slots = static_cast<std::int64_t>(std::ceil(ratio - 1e-9));
  return std::max<std::int64_t>(1, slots);
}

struct LearningTask {
  std::uint64_t id = 0;
  int size = 0;
  std::int64_t arrival_slot = 0;
  std::optional<std::int64_t> dispatch_slot;
  std::optional<std::int64_t> completion_slot;
};

struct SubtaskAssignment {
  int node = 0;
  std::int64_t completion_slot = 0;
  bool done = false;  // finished or cancelled; node no longer held
};

struct InFlightTask {
  std::uint64_t task_id = 0;
  int k = 0;
  std::vector<SubtaskAssignment> assignments;
  std::int64_t task_completion_slot = 0;
};

struct CompletedTask {
  std::uint64_t id = 0;
  std::int64_t arrival_slot = 0;
  std::int64_t dispatch_slot = 0;
  std::int64_t completion_slot = 0;
};

struct StepOutcome {
  int reward = 0;  // -(resident tasks) after departures, arrival, and action
  SystemState next_state;
  int dropped_this_slot = 0;
  std::vector<CompletedTask> completed;
};

// Samples per-node serving times for a code action and fixes the task's
// completion slot as the k-th smallest chunk completion. Pure apart from the
// RNG draws (one H and one straggle per assigned node, in subset order).
inline InFlightTask dispatch_task(const SystemConfig& cfg, const LearningTask& task,
                                  const Action& action, std::int64_t current_slot,
                                  SplitMix64& rng) {
  if (action.is_idle()) throw std::invalid_argument("cannot dispatch with the idle action");
  if (static_cast<int>(action.nodes.size()) != action.n)
    throw std::invalid_argument("action subset size does not match n");
  if (action.k < 1 || action.k > action.n)
    throw std::invalid_argument("action k outside [1, n]");
  if (task.dispatch_slot.has_value()) throw std::invalid_argument("task already dispatched");

  const int chunk = subtask_size(task.size, action.k);
  InFlightTask flight;
  flight.task_id = task.id;
  flight.k = action.k;
  flight.assignments.reserve(action.nodes.size());
  std::vector<std::int64_t> slots;
  slots.reserve(action.nodes.size());
  for (int j : action.nodes) {
    const long long h = sample_retransmissions(cfg.disconnect_probs[static_cast<std::size_t>(j)], rng);
    const double straggle = sample_straggle(cfg.straggle_rates[static_cast<std::size_t>(j)], rng);
    const double secs = subtask_serving_seconds(
        h, cfg.slot_seconds, straggle, cfg.per_point_seconds[static_cast<std::size_t>(j)], chunk);
    const std::int64_t done_at = current_slot + serving_slots(secs, cfg.slot_seconds);
    flight.assignments.push_back(SubtaskAssignment{j, done_at, false});
    slots.push_back(done_at);
  }
  flight.task_completion_slot = kth_smallest(slots, action.k);
  return flight;
}

// Slotted-time queue/node/link simulator. Each step() call runs one slot in
// a fixed order: departures, Bernoulli arrival, the given action, reward,
// slot advance. A task stays resident (counted in queue_count) from arrival
// until its k-th chunk result is back; the chunks a completed task no longer
// needs are cancelled at that same slot and their nodes freed.
//
// One instance owns one RNG; all stochastic draws flow through it, so
// identical (config, seed, action sequence) replays bit-identically.
// Instances are single-threaded and independent of each other.
class Environment {
 public:
  Environment(SystemConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)), rng_(seed), node_busy_(static_cast<std::size_t>(cfg_.num_nodes), 0) {
    cfg_.validate();
  }

  const SystemConfig& config() const { return cfg_; }
  std::int64_t slot() const { return slot_; }

  std::uint64_t arrivals() const { return arrivals_; }
  std::uint64_t completions() const { return completions_; }
  std::uint64_t drops() const { return drops_; }
  std::uint64_t resident_count() const { return resident_.size(); }

  const std::vector<InFlightTask>& in_flight() const { return in_flight_; }

  SystemState state() const {
    SystemState s;
    s.queue_count = static_cast<int>(resident_.size());
    s.head_task_size = 0;
    if (const LearningTask* head = head_undispatched()) s.head_task_size = head->size;
    s.node_available.resize(node_busy_.size());
    for (std::size_t j = 0; j < node_busy_.size(); ++j) s.node_available[j] = node_busy_[j] ? 0 : 1;
    return s;
  }

  StepOutcome step(const Action& action) {
    StepOutcome out;

    // (1) Departures scheduled for this slot.
    for (InFlightTask& flight : in_flight_) {
      for (SubtaskAssignment& asg : flight.assignments) {
        if (!asg.done && asg.completion_slot == slot_) {
          asg.done = true;
          node_busy_[static_cast<std::size_t>(asg.node)] = 0;
        }
      }
    }
    for (std::size_t i = 0; i < in_flight_.size();) {
      if (in_flight_[i].task_completion_slot != slot_) {
        ++i;
        continue;
      }
      for (SubtaskAssignment& asg : in_flight_[i].assignments) {
        if (!asg.done) {  // cancelled alongside the decode, no extra signaling cost
          asg.done = true;
          node_busy_[static_cast<std::size_t>(asg.node)] = 0;
        }
      }
      retire_task(in_flight_[i].task_id, out);
      in_flight_[i] = std::move(in_flight_.back());
      in_flight_.pop_back();
    }

    // (2) Arrival.
    if (rng_.next_bernoulli(cfg_.arrival_prob)) {
      ++arrivals_;
      if (resident_.size() >= static_cast<std::size_t>(cfg_.queue_capacity)) {
        ++drops_;
        out.dropped_this_slot = 1;
      } else {
        LearningTask task;
        task.id = next_task_id_++;
        task.size = cfg_.task_sizes[rng_.next_below(cfg_.task_sizes.size())];
        task.arrival_slot = slot_;
        resident_.push_back(task);
      }
    }

    // (3) Action.
    if (!action.is_idle()) {
      LearningTask* head = head_undispatched();
      if (head == nullptr) throw std::invalid_argument("code action with no undispatched task");
      for (int j : action.nodes) {
        if (node_busy_[static_cast<std::size_t>(j)])
          throw std::invalid_argument("code action targets a busy node");
      }
      InFlightTask flight = dispatch_task(cfg_, *head, action, slot_, rng_);
      head->dispatch_slot = slot_;
      for (int j : action.nodes) node_busy_[static_cast<std::size_t>(j)] = 1;
      in_flight_.push_back(std::move(flight));
    }

    // (4) Reward, (5) advance.
    out.reward = -static_cast<int>(resident_.size());
    ++slot_;
    out.next_state = state();
    return out;
  }

 private:
  const LearningTask* head_undispatched() const {
    for (const LearningTask& t : resident_)
      if (!t.dispatch_slot.has_value()) return &t;
    return nullptr;
  }
  LearningTask* head_undispatched() {
    return const_cast<LearningTask*>(std::as_const(*this).head_undispatched());
  }

  void retire_task(std::uint64_t task_id, StepOutcome& out) {
    for (std::size_t i = 0; i < resident_.size(); ++i) {
      if (resident_[i].id != task_id) continue;
      const LearningTask& t = resident_[i];
      out.completed.push_back(CompletedTask{t.id, t.arrival_slot, *t.dispatch_slot, slot_});
      ++completions_;
      resident_.erase(resident_.begin() + static_cast<std::ptrdiff_t>(i));
      return;
    }
    throw std::logic_error("in-flight task missing from the resident queue");
  }

  SystemConfig cfg_;
  SplitMix64 rng_;
  std::int64_t slot_ = 0;
  std::uint64_t next_task_id_ = 0;
  std::vector<LearningTask> resident_;  // arrival order; dispatched tasks stay until decoded
  std::vector<InFlightTask> in_flight_;
  std::vector<std::uint8_t> node_busy_;
  std::uint64_t arrivals_ = 0;
  std::uint64_t completions_ = 0;
  std::uint64_t drops_ = 0;
};

// Feature vector for function approximation: (m/M, f/f_max, e_1..e_N),
// every component in [0, 1].
inline std::vector<double> state_features(const SystemState& state, const SystemConfig& cfg) {
  std::vector<double> x;
  x.reserve(state.node_available.size() + 2);
  x.push_back(static_cast<double>(state.queue_count) / cfg.queue_capacity);
  x.push_back(static_cast<double>(state.head_task_size) / cfg.f_max);
  for (std::uint8_t e : state.node_available) x.push_back(e ? 1.0 : 0.0);
  return x;
}

}  // namespace codedge
