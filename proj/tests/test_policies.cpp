#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/lambert.hpp"
#include "codedge/policies.hpp"
#include "codedge/rng.hpp"

using codedge::Action;
using codedge::ActionMask;
using codedge::ActionSpace;
using codedge::SplitMix64;
using codedge::SystemConfig;
using codedge::SystemState;

namespace {

// Independent root finder for w e^w = x on w <= -1: w e^w is decreasing
// there, so plain sign bisection converges without any of the tricks the
// production routine uses.
double bisect_lower_branch(double x) {
  double lo = -700.0, hi = -1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = mid * std::exp(mid) - x;
    if (f > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SystemState make_state(int m, int f, std::vector<std::uint8_t> avail) {
  SystemState s;
  s.queue_count = m;
  s.head_task_size = f;
  s.node_available = std::move(avail);
  return s;
}

}  // namespace

TEST(LambertTest, BranchPoint) {
  EXPECT_NEAR(codedge::lambert_w_minus1(-std::exp(-1.0)), -1.0, 1e-6);
  EXPECT_NEAR(codedge::lambert_w_minus1(-std::exp(-1.0) + 1e-12), -1.0, 1e-4);
}

TEST(LambertTest, MatchesIndependentBisection) {
  EXPECT_NEAR(codedge::lambert_w_minus1(-0.1), bisect_lower_branch(-0.1), 1e-10);
  EXPECT_NEAR(codedge::lambert_w_minus1(-0.1), -3.577152, 1e-6);
  const double x2 = -std::exp(-2.0);
  EXPECT_NEAR(codedge::lambert_w_minus1(x2), bisect_lower_branch(x2), 1e-10);
  EXPECT_NEAR(codedge::lambert_w_minus1(x2), -3.1462, 1e-4);
}

TEST(LambertTest, ResidualOnGrid) {
  const double lo = -std::exp(-1.0) + 1e-9;
  const double hi = -1e-9;
  for (int i = 0; i < 1000; ++i) {
    const double x = lo + (hi - lo) * i / 999.0;
    const double w = codedge::lambert_w_minus1(x);
    EXPECT_LE(w, -1.0 + 1e-9);
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12) << "x=" << x;
  }
}

TEST(LambertTest, DomainErrors) {
  EXPECT_THROW(codedge::lambert_w_minus1(0.0), std::domain_error);
  EXPECT_THROW(codedge::lambert_w_minus1(0.5), std::domain_error);
  EXPECT_THROW(codedge::lambert_w_minus1(-1.0), std::domain_error);
  EXPECT_THROW(codedge::lambert_w_minus1(-0.5), std::domain_error);
}

TEST(StaticOptimalKTest, ReferenceValue) {
  // rate 1, five free nodes: (1 + 1/W_-1(-e^-2)) * 5 = 3.41 -> 3
  EXPECT_EQ(codedge::static_optimal_k(5, 1.0), 3);
}

TEST(StaticOptimalKTest, SingleNodeClamps) {
  for (double rate : {0.01, 0.5, 1.0, 10.0}) EXPECT_EQ(codedge::static_optimal_k(1, rate), 1);
}

TEST(StaticOptimalKTest, StragglingLimits) {
  // near-zero rate = enormous mean straggle: maximal redundancy, k = 1
  EXPECT_EQ(codedge::static_optimal_k(5, 1e-6), 1);
  // huge rate = negligible straggle: no redundancy needed, k = n
  EXPECT_EQ(codedge::static_optimal_k(5, 50.0), 5);
}

TEST(StaticOptimalKTest, MoreStragglingNeverRaisesK) {
  // k is non-decreasing in the rate (smaller rate = heavier straggling)
  for (int avail : {2, 5, 9}) {
    int prev = 1;
    for (double rate = 0.05; rate < 20.0; rate *= 1.15) {
      const int k = codedge::static_optimal_k(avail, rate);
      EXPECT_GE(k, prev) << "avail=" << avail << " rate=" << rate;
      EXPECT_GE(k, 1);
      EXPECT_LE(k, avail);
      prev = k;
    }
  }
}

TEST(GreedyPolicyTest, TakesAllFreeNodesWaitsForAll) {
  SystemConfig cfg;
  ActionSpace space(cfg.num_nodes);
  codedge::GreedyPolicy policy(space);
  SplitMix64 rng(1);

  const SystemState st = make_state(1, 100, {1, 0, 1, 1, 0});
  const Action& a = policy.decide(st, space.feasibility(st), rng);
  EXPECT_EQ(a.n, 3);
  EXPECT_EQ(a.k, 3);
  EXPECT_EQ(a.nodes, (std::vector<int>{0, 2, 3}));

  const SystemState none = make_state(1, 100, {0, 0, 0, 0, 0});
  EXPECT_TRUE(policy.decide(none, space.feasibility(none), rng).is_idle());
  const SystemState idle_head = make_state(1, 0, {1, 1, 1, 1, 1});
  EXPECT_TRUE(policy.decide(idle_head, space.feasibility(idle_head), rng).is_idle());
}

TEST(OneNodePolicyTest, ForcedAndUniformChoices) {
  SystemConfig cfg;
  ActionSpace space(cfg.num_nodes);
  codedge::OneNodePolicy policy(space);
  SplitMix64 rng(7);

  const SystemState one = make_state(1, 100, {0, 0, 0, 1, 0});
  const Action& a = policy.decide(one, space.feasibility(one), rng);
  EXPECT_EQ(a.n, 1);
  EXPECT_EQ(a.k, 1);
  EXPECT_EQ(a.nodes, std::vector<int>{3});

  const SystemState all = make_state(1, 100, {1, 1, 1, 1, 1});
  const ActionMask mask = space.feasibility(all);
  std::vector<int> counts(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Action& pick = policy.decide(all, mask, rng);
    ++counts[static_cast<std::size_t>(pick.nodes[0])];
  }
  for (int j = 0; j < 5; ++j)
    EXPECT_NEAR(static_cast<double>(counts[static_cast<std::size_t>(j)]) / n, 0.2, 0.01);

  const SystemState none = make_state(1, 100, {0, 0, 0, 0, 0});
  EXPECT_TRUE(policy.decide(none, space.feasibility(none), rng).is_idle());
}

TEST(StaticCodePolicyTest, UsesOptimalFractionOverFreeNodes) {
  SystemConfig cfg;
  cfg.straggle_rates = {1.0, 1.0, 1.0, 1.0, 1.0};
  ActionSpace space(cfg.num_nodes);
  codedge::StaticCodePolicy policy(space, cfg);
  SplitMix64 rng(1);

  const SystemState all = make_state(1, 100, {1, 1, 1, 1, 1});
  const Action& a = policy.decide(all, space.feasibility(all), rng);
  EXPECT_EQ(a.n, 5);
  EXPECT_EQ(a.k, 3);

  const SystemState one = make_state(1, 100, {0, 1, 0, 0, 0});
  const Action& b = policy.decide(one, space.feasibility(one), rng);
  EXPECT_EQ(b.n, 1);
  EXPECT_EQ(b.k, 1);

  const SystemState empty_head = make_state(0, 0, {1, 1, 1, 1, 1});
  EXPECT_TRUE(policy.decide(empty_head, space.feasibility(empty_head), rng).is_idle());
}

TEST(PolicyPropertyTest, EveryDecisionIsFeasible) {
  SystemConfig cfg;
  ActionSpace space(cfg.num_nodes);
  codedge::GreedyPolicy greedy(space);
  codedge::OneNodePolicy onenode(space);
  codedge::StaticCodePolicy static_code(space, cfg);
  codedge::RandomPolicy random(space);
  std::vector<codedge::Policy*> policies = {&greedy, &onenode, &static_code, &random};

  SplitMix64 state_rng(3), rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::uint8_t> avail(5);
    for (auto& e : avail) e = state_rng.next_below(2) ? 1 : 0;
    const int f = state_rng.next_below(3) ? static_cast<int>(100 * (1 + state_rng.next_below(3))) : 0;
    const SystemState st = make_state(static_cast<int>(state_rng.next_below(11)), f, avail);
    const ActionMask mask = space.feasibility(st);
    for (codedge::Policy* p : policies) {
      const Action& a = p->decide(st, mask, rng);
      EXPECT_TRUE(mask[static_cast<std::size_t>(a.global_index)])
          << p->name() << " picked infeasible action " << a.global_index;
    }
  }
}
