#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "codedge/dueling.hpp"
#include "codedge/rng.hpp"

using codedge::ActionMask;
using codedge::DuelingNet;
using codedge::LinearLayer;
using codedge::PlainDqnNet;
using codedge::ReplayBuffer;
using codedge::SplitMix64;
using codedge::TrainConfig;
using codedge::TrainingSample;
using codedge::Transition;

namespace {

// Hidden activation pinned to 1 so value/advantage outputs equal the biases.
DuelingNet pinned_net(double v, std::vector<double> advantages) {
  DuelingNet net;
  net.shared = LinearLayer::zeros(1, 1);
  net.shared.b[0] = 1.0;
  net.value = LinearLayer::zeros(1, 1);
  net.value.b[0] = v;
  net.advantage = LinearLayer::zeros(1, static_cast<int>(advantages.size()));
  net.advantage.b = std::move(advantages);
  return net;
}

DuelingNet random_net(int input, int hidden, int actions, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DuelingNet net = DuelingNet::init(input, hidden, actions, rng);
  // biases included so FD checks exercise them too
  for (auto* block : parameter_blocks(net))
    for (double& p : *block) p += 0.1 * (2.0 * rng.next_double() - 1.0);
  return net;
}

std::vector<double> random_features(int n, SplitMix64& rng) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.next_double();
  return x;
}

struct DeepBandit {
  std::vector<double> feats{1.0};
  int action_count() const { return 2; }
  ActionMask feasible() const { return {1, 1}; }
  const std::vector<double>& features() const { return feats; }
  double step(int a) { return a == 0 ? -1.0 : -2.0; }
};

}  // namespace

TEST(DuelingForwardTest, MeanCombineExample) {
  const DuelingNet net = pinned_net(2.0, {1.0, 3.0, -4.0});  // mean(G) = 0
  const auto f = codedge::forward(net, {0.0});
  EXPECT_NEAR(f.value, 2.0, 1e-12);
  ASSERT_EQ(f.q.size(), 3u);
  EXPECT_NEAR(f.q[0], 3.0, 1e-12);
  EXPECT_NEAR(f.q[1], 5.0, 1e-12);
  EXPECT_NEAR(f.q[2], -2.0, 1e-12);
}

TEST(DuelingForwardTest, ConstantAdvantagesCancel) {
  const DuelingNet net = pinned_net(-1.5, {4.0, 4.0, 4.0, 4.0});
  const auto f = codedge::forward(net, {0.0});
  for (double q : f.q) EXPECT_NEAR(q, -1.5, 1e-12);
}

TEST(DuelingForwardTest, CombinedAdvantagesAreMeanZero) {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const DuelingNet net = random_net(7, 16, 81, 1000 + static_cast<std::uint64_t>(trial));
    const auto x = random_features(7, rng);
    const auto f = codedge::forward(net, x);
    double sum = 0.0;
    for (double q : f.q) sum += q - f.value;
    EXPECT_LE(std::abs(sum / static_cast<double>(f.q.size())), 1e-6);
  }
}

TEST(DuelingForwardTest, MaxVariantExample) {
  const DuelingNet net = pinned_net(2.0, {1.0, 3.0, -4.0});
  const auto q = codedge::forward_max_variant(net, {0.0});
  ASSERT_EQ(q.size(), 3u);
  EXPECT_NEAR(q[0], 0.0, 1e-12);
  EXPECT_NEAR(q[1], 2.0, 1e-12);
  EXPECT_NEAR(q[2], -5.0, 1e-12);
}

TEST(DuelingForwardTest, BothCombinesAgreeOnArgmaxAndMaxEqualsValue) {
  SplitMix64 rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const DuelingNet net = random_net(5, 8, 13, 5000 + static_cast<std::uint64_t>(trial));
    const auto x = random_features(5, rng);
    const auto f = codedge::forward(net, x);
    const auto qmax = codedge::forward_max_variant(net, x);
    int arg_mean = 0, arg_max = 0;
    for (std::size_t a = 1; a < f.q.size(); ++a) {
      if (f.q[a] > f.q[static_cast<std::size_t>(arg_mean)]) arg_mean = static_cast<int>(a);
      if (qmax[a] > qmax[static_cast<std::size_t>(arg_max)]) arg_max = static_cast<int>(a);
    }
    EXPECT_EQ(arg_mean, arg_max);
    EXPECT_NEAR(qmax[static_cast<std::size_t>(arg_max)], f.value, 1e-9);
  }
}

TEST(TdTargetTest, Examples) {
  EXPECT_NEAR(codedge::td_target(-1.0, 0.99, {-3.0, -2.0, -9.0}, {1, 1, 1}), -2.98, 1e-12);
  EXPECT_NEAR(codedge::td_target(-1.5, 0.0, {7.0, 3.0}, {1, 1}), -1.5, 1e-12);
  EXPECT_NEAR(codedge::td_target(-1.0, 0.5, {4.0, 4.0, 4.0}, {1, 1, 1}), 1.0, 1e-12);
  // infeasible entries are ignored even when they hold the max
  EXPECT_NEAR(codedge::td_target(0.0, 1.0, {100.0, -2.0}, {0, 1}), -2.0, 1e-12);
  EXPECT_THROW(codedge::td_target(0.0, 0.9, {1.0}, {0}), std::invalid_argument);
}

TEST(DuelingBackwardTest, ZeroResidualGivesZeroGradients) {
  const DuelingNet net = random_net(4, 6, 5, 42);
  SplitMix64 rng(43);
  std::vector<std::vector<double>> xs;
  std::vector<TrainingSample> batch;
  for (int i = 0; i < 8; ++i) xs.push_back(random_features(4, rng));
  for (int i = 0; i < 8; ++i) {
    const int a = static_cast<int>(rng.next_below(5));
    const auto q = codedge::q_values(net, xs[static_cast<std::size_t>(i)]);
    batch.push_back(TrainingSample{&xs[static_cast<std::size_t>(i)], a, q[static_cast<std::size_t>(a)]});
  }
  DuelingNet grads = DuelingNet::zeros_like(net);
  const double loss = codedge::backward(net, batch, grads);
  EXPECT_NEAR(loss, 0.0, 1e-18);
  for (auto* block : parameter_blocks(grads))
    for (double g : *block) EXPECT_EQ(g, 0.0);
}

TEST(DuelingBackwardTest, AdvantageBiasGradientHasMeanSubtractionPattern) {
  // single sample: dL/dG_b = coef * (1{b==a} - 1/|A|)
  const DuelingNet net = random_net(3, 4, 6, 77);
  SplitMix64 rng(78);
  const auto x = random_features(3, rng);
  const int action = 2;
  const double target = -1.0;
  std::vector<TrainingSample> batch = {{&x, action, target}};
  DuelingNet grads = DuelingNet::zeros_like(net);
  codedge::backward(net, batch, grads);

  const auto q = codedge::q_values(net, x);
  const double coef = 2.0 * (q[action] - target);
  for (int b = 0; b < 6; ++b) {
    const double expected = coef * ((b == action ? 1.0 : 0.0) - 1.0 / 6.0);
    EXPECT_NEAR(grads.advantage.b[static_cast<std::size_t>(b)], expected, 1e-12) << b;
  }
  EXPECT_NEAR(grads.value.b[0], coef, 1e-12);
}

namespace {

template <typename Net>
void check_gradients_fd(const Net& net_in, int input_dim, int actions, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> xs;
  std::vector<TrainingSample> batch;
  for (int i = 0; i < 16; ++i) xs.push_back(random_features(input_dim, rng));
  for (int i = 0; i < 16; ++i)
    batch.push_back(TrainingSample{&xs[static_cast<std::size_t>(i)],
                                   static_cast<int>(rng.next_below(static_cast<std::uint64_t>(actions))),
                                   -2.0 * rng.next_double()});

  Net net = net_in;
  Net grads = Net::zeros_like(net);
  codedge::backward(net, batch, grads);

  auto loss_of = [&](Net& n) {
    double loss = 0.0;
    for (const TrainingSample& s : batch) {
      const auto q = codedge::q_values(n, *s.features);
      const double r = q[static_cast<std::size_t>(s.action)] - s.target;
      loss += r * r / static_cast<double>(batch.size());
    }
    return loss;
  };

  const double h = 1e-5;
  auto blocks = parameter_blocks(net);
  auto gblocks = parameter_blocks(grads);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b]->size(); ++i) {
      double& p = (*blocks[b])[i];
      const double saved = p;
      p = saved + h;
      const double up = loss_of(net);
      p = saved - h;
      const double down = loss_of(net);
      p = saved;
      const double fd = (up - down) / (2.0 * h);
      const double analytic = (*gblocks[b])[i];
      const double scale = std::max({1.0, std::abs(fd), std::abs(analytic)});
      EXPECT_LE(std::abs(fd - analytic) / scale, 1e-4) << "block " << b << " index " << i;
    }
  }
}

}  // namespace

TEST(GradientCheckTest, DuelingMatchesFiniteDifferences) {
  check_gradients_fd(random_net(5, 8, 7, 101), 5, 7, 202);
}

TEST(GradientCheckTest, PlainDqnMatchesFiniteDifferences) {
  SplitMix64 rng(303);
  PlainDqnNet net = PlainDqnNet::init(5, 8, 7, rng);
  for (auto* block : parameter_blocks(net))
    for (double& p : *block) p += 0.1 * (2.0 * rng.next_double() - 1.0);
  check_gradients_fd(net, 5, 7, 404);
}

TEST(ReplayBufferTest, FifoOverflowDropsOldest) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = i;
    buf.push(std::move(t));
  }
  EXPECT_EQ(buf.size(), 3u);
  std::vector<double> rewards;
  for (std::size_t i = 0; i < buf.size(); ++i) rewards.push_back(buf.at(i).reward);
  std::sort(rewards.begin(), rewards.end());
  EXPECT_EQ(rewards, (std::vector<double>{2.0, 3.0, 4.0}));
}

TEST(ReplayBufferTest, SamplesUniformly) {
  ReplayBuffer buf(4);
  for (int i = 0; i < 4; ++i) {
    Transition t;
    t.reward = i;
    buf.push(std::move(t));
  }
  SplitMix64 rng(5);
  std::vector<int> counts(4, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(buf.sample(rng).reward)];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 0.25, 0.02);
}

TEST(TargetSnapshotTest, CopiesAreIndependent) {
  DuelingNet net = random_net(4, 6, 5, 11);
  const DuelingNet target = net;  // sync
  EXPECT_TRUE(target == net);
  net.shared.w[0] += 1.0;  // training moves on
  EXPECT_FALSE(target == net);
}

TEST(TrainValueNetTest, ZeroIterationsStillYieldsFeasiblePolicy) {
  DeepBandit env;
  TrainConfig cfg;
  cfg.iterations = 0;
  SplitMix64 init(1);
  auto result = codedge::train_value_net(
      env, DuelingNet::init(1, 8, 2, init), cfg, 2);
  EXPECT_TRUE(result.curve.empty());
  const auto q = codedge::q_values(result.net, env.features());
  EXPECT_EQ(q.size(), 2u);
  EXPECT_NO_THROW(codedge::feasible_argmax(q, env.feasible()));
}

TEST(TrainValueNetTest, DuelingLearnsBetterBanditArm) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    DeepBandit env;
    TrainConfig cfg;
    cfg.iterations = 5000;
    cfg.learning_rate = 0.005;
    cfg.gamma = 0.9;
    cfg.target_period = 100;
    cfg.capacity = 1000;
    cfg.epsilon_decay = 0.999;
    cfg.epsilon_floor = 0.05;
    cfg.eval_every = 0;
    SplitMix64 init(seed);
    auto result = codedge::train_value_net(env, DuelingNet::init(1, 8, 2, init), cfg, seed + 10);
    const auto q = codedge::q_values(result.net, env.features());
    EXPECT_GT(q[0], q[1]) << "seed " << seed;
  }
}

TEST(TrainValueNetTest, PlainDqnLearnsBetterBanditArmAndHasFullWidthOutput) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    DeepBandit env;
    TrainConfig cfg;
    cfg.iterations = 5000;
    cfg.learning_rate = 0.005;
    cfg.gamma = 0.9;
    cfg.target_period = 100;
    cfg.capacity = 1000;
    cfg.epsilon_decay = 0.999;
    cfg.epsilon_floor = 0.05;
    cfg.eval_every = 0;
    SplitMix64 init(seed);
    PlainDqnNet net = PlainDqnNet::init(1, 16, 2, init);
    EXPECT_EQ(codedge::q_values(net, env.features()).size(), 2u);
    auto result = codedge::train_value_net(env, std::move(net), cfg, seed + 10);
    const auto q = codedge::q_values(result.net, env.features());
    EXPECT_GT(q[0], q[1]) << "seed " << seed;
  }
}

TEST(CheckpointTest, DuelingRoundTripsBitExactly) {
  const DuelingNet net = random_net(7, 16, 81, 1212);
  std::stringstream buffer;
  codedge::save_net(buffer, net);
  const DuelingNet loaded = codedge::load_dueling(buffer);
  EXPECT_TRUE(net == loaded);
}

TEST(CheckpointTest, PlainDqnRoundTripsBitExactly) {
  SplitMix64 rng(77);
  const PlainDqnNet net = PlainDqnNet::init(7, 16, 81, rng);
  std::stringstream buffer;
  codedge::save_net(buffer, net);
  const PlainDqnNet loaded = codedge::load_plain_dqn(buffer);
  EXPECT_TRUE(net == loaded);
}

TEST(CheckpointTest, KindMismatchAndTruncationAreErrors) {
  SplitMix64 rng(78);
  const PlainDqnNet net = PlainDqnNet::init(3, 4, 5, rng);
  std::stringstream buffer;
  codedge::save_net(buffer, net);
  EXPECT_THROW(codedge::load_dueling(buffer), std::runtime_error);

  std::stringstream truncated("codedge-net 1\ndueling\ninput 3 hidden 4 actions 5\nshared 4 3\n1 2");
  EXPECT_THROW(codedge::load_dueling(truncated), std::runtime_error);
}

TEST(CurveCsvTest, WritesSchema) {
  std::vector<codedge::CurvePoint> curve = {{2000, 0.8, 1.25, -3.5}};
  std::stringstream os;
  codedge::write_curve_csv(os, curve);
  EXPECT_EQ(os.str(), "iteration,epsilon,loss,eval_reward\n2000,0.8,1.25,-3.5\n");
}
