#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "codedge/config.hpp"

namespace codedge {

// A joint coding/scheduling decision: either stay idle, or encode the head
// task with an (n, k) MDS code and ship the n coded pieces to `nodes`.
struct Action {
  enum class Kind { Idle, Code };

  Kind kind = Kind::Idle;
  int n = 0;
  int k = 0;
  std::vector<int> nodes;       // ascending node indices, |nodes| == n
  std::uint32_t node_mask = 0;  // bit j set iff node j is in `nodes`
  int global_index = 0;

  bool is_idle() const { return kind == Kind::Idle; }
};

using ActionMask = std::vector<std::uint8_t>;

// Size of each of the k equal coded chunks of an f-point task.
inline int subtask_size(int f, int k) {
  if (f < 1 || k < 1) throw std::invalid_argument("subtask_size needs f >= 1 and k >= 1");
  return (f + k - 1) / k;
}

// 1 + sum_{n=1..N} n * C(N, n) = 1 + N * 2^(N-1).
inline long long action_count(int num_nodes) {
  if (num_nodes < 1) throw std::invalid_argument("action_count needs N >= 1");
  return 1 + static_cast<long long>(num_nodes) * (1LL << (num_nodes - 1));
}

// Fixed enumeration of every action over the full node set: Idle first, then
// by n, then lexicographic node subset, then k. Indices are stable across
// runs, so they double as network output positions and Q-table columns.
// Per-state restrictions are applied with feasibility masks, never by
// re-enumerating.
class ActionSpace {
 public:
  explicit ActionSpace(int num_nodes) : num_nodes_(num_nodes) {
    if (num_nodes < 1) throw std::invalid_argument("ActionSpace needs N >= 1");
    if (num_nodes > 20) throw std::invalid_argument("ActionSpace is combinatorial; N > 20 refused");
    actions_.push_back(Action{});  // Idle, index 0
    std::vector<int> subset;
    for (int n = 1; n <= num_nodes; ++n) {
      subset.assign(static_cast<std::size_t>(n), 0);
      enumerate_subsets(n, 0, 0, subset);
    }
    for (const Action& a : actions_) {
      if (!a.is_idle()) index_by_key_[pack_key(a.n, a.k, a.node_mask)] = a.global_index;
    }
  }

  int num_nodes() const { return num_nodes_; }
  int size() const { return static_cast<int>(actions_.size()); }
  const std::vector<Action>& actions() const { return actions_; }
  const Action& at(int index) const { return actions_.at(static_cast<std::size_t>(index)); }
  const Action& idle() const { return actions_.front(); }

  // Global index of the (n, k, subset) action; throws if no such action.
  int index_of(int n, int k, std::uint32_t node_mask) const {
    auto it = index_by_key_.find(pack_key(n, k, node_mask));
    if (it == index_by_key_.end()) throw std::invalid_argument("no such action");
    return it->second;
  }

  // Idle is always feasible; a code action needs an undispatched task and
  // every node of its subset free.
  ActionMask feasibility(const SystemState& state) const {
    ActionMask mask(actions_.size(), 0);
    mask[0] = 1;
    if (state.head_task_size <= 0) return mask;
    const std::uint32_t avail = state.availability_mask();
    for (std::size_t i = 1; i < actions_.size(); ++i) {
      mask[i] = (actions_[i].node_mask & ~avail) == 0 ? 1 : 0;
    }
    return mask;
  }

  // Debug export, one row per action: index,n,k,subset ("|"-joined nodes).
  void write_csv(std::ostream& os) const {
    os << "index,n,k,subset\n";
    for (const Action& a : actions_) {
      os << a.global_index << ',' << a.n << ',' << a.k << ',';
      for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        if (i) os << '|';
        os << a.nodes[i];
      }
      os << '\n';
    }
  }

 private:
  void enumerate_subsets(int n, int depth, int first, std::vector<int>& subset) {
    if (depth == n) {
      std::uint32_t m = 0;
      for (int j : subset) m |= (1u << j);
      for (int k = 1; k <= n; ++k) {
        Action a;
        a.kind = Action::Kind::Code;
        a.n = n;
        a.k = k;
        a.nodes = subset;
        a.node_mask = m;
        a.global_index = static_cast<int>(actions_.size());
        actions_.push_back(std::move(a));
      }
      return;
    }
    for (int j = first; j <= num_nodes_ - (n - depth); ++j) {
      subset[static_cast<std::size_t>(depth)] = j;
      enumerate_subsets(n, depth + 1, j + 1, subset);
    }
  }

  static std::uint64_t pack_key(int n, int k, std::uint32_t mask) {
    return (static_cast<std::uint64_t>(mask) << 12) | (static_cast<std::uint64_t>(n) << 6) |
           static_cast<std::uint64_t>(k);
  }

  int num_nodes_;
  std::vector<Action> actions_;
  std::unordered_map<std::uint64_t, int> index_by_key_;
};

}  // namespace codedge
