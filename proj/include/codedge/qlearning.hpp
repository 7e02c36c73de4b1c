#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/env.hpp"
#include "codedge/policies.hpp"
#include "codedge/rng.hpp"

namespace codedge {

// Discrete state key: occupancy, head task size, availability bitmask.
// Task sizes come from a finite set, so the key space is exact.
struct TabularKey {
  int m = 0;
  int f = 0;
  std::uint32_t availability = 0;

  std::uint64_t packed() const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 48) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(f)) << 16) |
           static_cast<std::uint64_t>(availability & 0xffffu);
  }
  static TabularKey unpack(std::uint64_t v) {
    TabularKey k;
    k.m = static_cast<int>((v >> 48) & 0xffffu);
    k.f = static_cast<int>((v >> 16) & 0xffffffffu);
    k.availability = static_cast<std::uint32_t>(v & 0xffffu);
    return k;
  }
  static TabularKey of(const SystemState& s) {
    return TabularKey{s.queue_count, s.head_task_size, s.availability_mask()};
  }
};

// Q(s, a) storage with an implicit zero default for unseen states. Rows are
// materialized per state key, one value per global action index.
class QTable {
 public:
  explicit QTable(int num_actions) : num_actions_(num_actions) {}

  int num_actions() const { return num_actions_; }
  std::size_t num_states() const { return rows_.size(); }

  double value(const TabularKey& key, int action) const {
    auto it = rows_.find(key.packed());
    if (it == rows_.end()) return 0.0;
    return it->second[static_cast<std::size_t>(action)];
  }

  std::vector<double>& row(const TabularKey& key) {
    auto [it, inserted] = rows_.try_emplace(key.packed());
    if (inserted) it->second.assign(static_cast<std::size_t>(num_actions_), 0.0);
    return it->second;
  }

  const std::vector<double>* find_row(const TabularKey& key) const {
    auto it = rows_.find(key.packed());
    return it == rows_.end() ? nullptr : &it->second;
  }

  template <typename Fn>  // fn(const TabularKey&, int action, double q)
  void for_each_entry(Fn&& fn) const {
    for (const auto& [packed, row] : rows_) {
      const TabularKey key = TabularKey::unpack(packed);
      for (int a = 0; a < num_actions_; ++a) fn(key, a, row[static_cast<std::size_t>(a)]);
    }
  }

  // One line per entry: m,f,bitmask,action_index,q_value. Keys are written
  // in sorted order so saves are byte-stable; values round-trip exactly.
  void save(std::ostream& os) const {
    for (const auto& [packed, row] : rows_) {
      const TabularKey key = TabularKey::unpack(packed);
      for (int a = 0; a < num_actions_; ++a) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", row[static_cast<std::size_t>(a)]);
        os << key.m << ',' << key.f << ',' << key.availability << ',' << a << ',' << buf << '\n';
      }
    }
  }

  static QTable load(std::istream& is, int num_actions) {
    QTable table(num_actions);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      TabularKey key;
      int action = 0;
      double q = 0.0;
      if (std::sscanf(line.c_str(), "%d,%d,%u,%d,%lg", &key.m, &key.f, &key.availability, &action,
                      &q) != 5)
        throw std::runtime_error("malformed Q-table line: " + line);
      if (action < 0 || action >= num_actions)
        throw std::runtime_error("Q-table action index out of range: " + line);
      table.row(key)[static_cast<std::size_t>(action)] = q;
    }
    return table;
  }

  bool operator==(const QTable& other) const {
    return num_actions_ == other.num_actions_ && rows_ == other.rows_;
  }

 private:
  int num_actions_;
  std::map<std::uint64_t, std::vector<double>> rows_;
};

// One temporal-difference backup: q + tau * (r + gamma * max_next - q).
inline double q_update(double q, double reward, double max_next_q, double tau, double gamma) {
  return q + tau * (reward + gamma * max_next_q - q);
}

// Feasible argmax over a Q row, ties broken toward the lowest index.
inline int feasible_argmax(const std::vector<double>& qrow, const ActionMask& mask) {
  int best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double q = qrow[i];
    if (best < 0 || q > best_q) {
      best = static_cast<int>(i);
      best_q = q;
    }
  }
  if (best < 0) throw std::invalid_argument("no feasible action in mask");
  return best;
}

// With probability epsilon a uniform feasible action, otherwise the feasible
// argmax.
inline int epsilon_greedy(const std::vector<double>& qrow, const ActionMask& mask, double epsilon,
                          SplitMix64& rng) {
  int feasible = 0;
  for (std::uint8_t b : mask) feasible += b ? 1 : 0;
  if (feasible == 0) throw std::invalid_argument("no feasible action in mask");
  if (rng.next_double() < epsilon) {
    std::uint64_t pick = rng.next_below(static_cast<std::uint64_t>(feasible));
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      if (pick == 0) return static_cast<int>(i);
      --pick;
    }
  }
  return feasible_argmax(qrow, mask);
}

enum class TauSchedule { Constant, RobbinsMonro };

struct QLearnConfig {
  double learning_rate = 0.1;
  double gamma = 0.9;
  double epsilon_start = 1.0;
  // 0 = anneal to the floor over the full iteration budget (see TrainConfig).
  double epsilon_decay = 0.0;
  double epsilon_floor = 0.01;
  long long iterations = 1'000'000;
  // First-touch value for a state's Q row. Rewards are all non-positive, so
  // 0 is the optimistic extreme and makes the bootstrap max chase untried
  // actions forever; seeding at the return floor (-M/(1-gamma) for the
  // simulator) removes that bias. NaN = keep 0.
  double initial_q = std::numeric_limits<double>::quiet_NaN();
  // Constant tau matches the reference setting; the Robbins-Monro option
  // tau_t = c / (1 + t/d) satisfies the square-summability condition instead.
  TauSchedule tau_schedule = TauSchedule::Constant;
  double tau_c = 0.5;
  double tau_d = 10000.0;

  double effective_epsilon_decay() const {
    if (epsilon_decay > 0.0) return epsilon_decay;
    if (iterations <= 0 || epsilon_floor <= 0.0 || epsilon_start <= epsilon_floor) return 1.0;
    return std::exp(std::log(epsilon_floor / epsilon_start) / static_cast<double>(iterations));
  }

  double tau_at(long long t) const {
    if (tau_schedule == TauSchedule::Constant) return learning_rate;
    return tau_c / (1.0 + static_cast<double>(t) / tau_d);
  }

  void validate() const {
    if (!(learning_rate >= 0.0 && learning_rate < 1.0))
      throw std::invalid_argument("learning_rate must lie in [0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (iterations < 0) throw std::invalid_argument("iterations must be non-negative");
    if (!(epsilon_floor <= epsilon_start))
      throw std::invalid_argument("epsilon floor must not exceed epsilon start");
    if (epsilon_decay < 0.0 || epsilon_decay > 1.0)
      throw std::invalid_argument("epsilon_decay must lie in (0, 1] or 0 for auto");
  }
};

// Environment concept shared by the tabular and deep trainers: the current
// feasibility mask, a step by global action index returning the reward, and
// (for tabular) a discrete state key.
//
// env must expose:
//   int action_count() const
//   ActionMask feasible() const
//   TabularKey state_key() const
//   double step(int action_index)
template <typename Env>
QTable train_qlearning(Env& env, const QLearnConfig& cfg, std::uint64_t policy_seed) {
  cfg.validate();
  QTable table(env.action_count());
  SplitMix64 rng(policy_seed);
  double epsilon = cfg.epsilon_start;
  const double decay = cfg.effective_epsilon_decay();
  const bool seed_rows = std::isfinite(cfg.initial_q);
  auto row_of = [&](const TabularKey& k) -> std::vector<double>& {
    const bool fresh = table.find_row(k) == nullptr;
    std::vector<double>& row = table.row(k);
    if (fresh && seed_rows)
      for (double& q : row) q = cfg.initial_q;
    return row;
  };

  TabularKey key = env.state_key();
  ActionMask mask = env.feasible();
  for (long long t = 0; t < cfg.iterations; ++t) {
    const int a = epsilon_greedy(row_of(key), mask, epsilon, rng);
    const double r = env.step(a);
    const TabularKey next_key = env.state_key();
    const ActionMask next_mask = env.feasible();

    const std::vector<double>& next_row = row_of(next_key);
    double max_next = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < next_mask.size(); ++i) {
      if (!next_mask[i]) continue;
      if (next_row[i] > max_next) max_next = next_row[i];
    }

    std::vector<double>& row = row_of(key);
    row[static_cast<std::size_t>(a)] =
        q_update(row[static_cast<std::size_t>(a)], r, max_next, cfg.tau_at(t), cfg.gamma);

    key = next_key;
    mask = next_mask;
    epsilon = std::max(cfg.epsilon_floor, epsilon * decay);
  }
  return table;
}

// Greedy policy read off a frozen table; unseen states fall back to the
// all-zero row (still mask-respecting).
class TabularPolicy : public Policy {
 public:
  TabularPolicy(const ActionSpace& space, QTable table)
      : space_(space), table_(std::move(table)), zeros_(static_cast<std::size_t>(space.size()), 0.0) {}

  const Action& decide(const SystemState& state, const ActionMask& mask, SplitMix64&) override {
    const std::vector<double>* row = table_.find_row(TabularKey::of(state));
    return space_.at(feasible_argmax(row ? *row : zeros_, mask));
  }
  std::string name() const override { return "qlearn"; }

  const QTable& table() const { return table_; }

 private:
  const ActionSpace& space_;
  QTable table_;
  std::vector<double> zeros_;
};

}  // namespace codedge
