#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedge/action_space.hpp"
#include "codedge/config.hpp"
#include "codedge/env.hpp"
#include "codedge/policies.hpp"
#include "codedge/qlearning.hpp"  // epsilon_greedy / feasible_argmax
#include "codedge/rng.hpp"

namespace codedge {

struct LinearLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major [out][in]
  std::vector<double> b;  // [out]

  static LinearLayer zeros(int in, int out) {
    LinearLayer l;
    l.in = in;
    l.out = out;
    l.w.assign(static_cast<std::size_t>(in) * out, 0.0);
    l.b.assign(static_cast<std::size_t>(out), 0.0);
    return l;
  }

  static LinearLayer glorot(int in, int out, SplitMix64& rng) {
    LinearLayer l = zeros(in, out);
    const double limit = std::sqrt(6.0 / (in + out));
    for (double& v : l.w) v = (2.0 * rng.next_double() - 1.0) * limit;
    return l;
  }

  // y = W x + b
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      double acc = b[static_cast<std::size_t>(o)];
      const double* row = &w[static_cast<std::size_t>(o) * in];
      for (int i = 0; i < in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(o)] = acc;
    }
  }

  bool operator==(const LinearLayer&) const = default;
};

// One shared relu layer feeding a scalar state-value stream and an
// |A|-dimensional advantage stream, combined as Q = V + (G - mean(G)).
struct DuelingNet {
  LinearLayer shared;     // input -> hidden
  LinearLayer value;      // hidden -> 1
  LinearLayer advantage;  // hidden -> |A|

  int input_dim() const { return shared.in; }
  int hidden_dim() const { return shared.out; }
  int num_actions() const { return advantage.out; }

  static DuelingNet init(int input, int hidden, int actions, SplitMix64& rng) {
    DuelingNet n;
    n.shared = LinearLayer::glorot(input, hidden, rng);
    n.value = LinearLayer::glorot(hidden, 1, rng);
    n.advantage = LinearLayer::glorot(hidden, actions, rng);
    return n;
  }

  static DuelingNet zeros_like(const DuelingNet& other) {
    DuelingNet n;
    n.shared = LinearLayer::zeros(other.shared.in, other.shared.out);
    n.value = LinearLayer::zeros(other.value.in, other.value.out);
    n.advantage = LinearLayer::zeros(other.advantage.in, other.advantage.out);
    return n;
  }

  bool operator==(const DuelingNet&) const = default;
};

struct DuelingForward {
  std::vector<double> pre;     // hidden pre-activation
  std::vector<double> hidden;  // relu(pre)
  double value = 0.0;
  std::vector<double> advantages;
  std::vector<double> q;  // mean-subtracted combine
};

inline DuelingForward forward(const DuelingNet& net, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != net.input_dim())
    throw std::invalid_argument("feature vector does not match network input size");
  DuelingForward f;
  net.shared.apply(x, f.pre);
  f.hidden = f.pre;
  for (double& h : f.hidden) h = h > 0.0 ? h : 0.0;
  std::vector<double> v;
  net.value.apply(f.hidden, v);
  f.value = v[0];
  net.advantage.apply(f.hidden, f.advantages);
  double mean = 0.0;
  for (double g : f.advantages) mean += g;
  mean /= static_cast<double>(f.advantages.size());
  f.q.resize(f.advantages.size());
  for (std::size_t a = 0; a < f.q.size(); ++a) f.q[a] = f.value + f.advantages[a] - mean;
  return f;
}

inline std::vector<double> q_values(const DuelingNet& net, const std::vector<double>& x) {
  return forward(net, x).q;
}

// Max-subtracted combine, Q = V + (G - max(G)). Shares the argmax with the
// mean form; Q at the argmax equals V exactly.
inline std::vector<double> forward_max_variant(const DuelingNet& net,
                                               const std::vector<double>& x) {
  DuelingForward f = forward(net, x);
  double top = -std::numeric_limits<double>::infinity();
  for (double g : f.advantages) top = std::max(top, g);
  std::vector<double> q(f.advantages.size());
  for (std::size_t a = 0; a < q.size(); ++a) q[a] = f.value + f.advantages[a] - top;
  return q;
}

// Plain deep Q comparator: two relu hidden layers, one Q head.
struct PlainDqnNet {
  LinearLayer l1;
  LinearLayer l2;
  LinearLayer head;

  int input_dim() const { return l1.in; }
  int num_actions() const { return head.out; }

  static PlainDqnNet init(int input, int hidden, int actions, SplitMix64& rng) {
    PlainDqnNet n;
    n.l1 = LinearLayer::glorot(input, hidden, rng);
    n.l2 = LinearLayer::glorot(hidden, hidden, rng);
    n.head = LinearLayer::glorot(hidden, actions, rng);
    return n;
  }

  static PlainDqnNet zeros_like(const PlainDqnNet& other) {
    PlainDqnNet n;
    n.l1 = LinearLayer::zeros(other.l1.in, other.l1.out);
    n.l2 = LinearLayer::zeros(other.l2.in, other.l2.out);
    n.head = LinearLayer::zeros(other.head.in, other.head.out);
    return n;
  }

  bool operator==(const PlainDqnNet&) const = default;
};

inline std::vector<double> q_values(const PlainDqnNet& net, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != net.input_dim())
    throw std::invalid_argument("feature vector does not match network input size");
  std::vector<double> h1, h2, q;
  net.l1.apply(x, h1);
  for (double& h : h1) h = h > 0.0 ? h : 0.0;
  net.l2.apply(h1, h2);
  for (double& h : h2) h = h > 0.0 ? h : 0.0;
  net.head.apply(h2, q);
  return q;
}

inline std::vector<std::vector<double>*> parameter_blocks(DuelingNet& n) {
  return {&n.shared.w, &n.shared.b, &n.value.w, &n.value.b, &n.advantage.w, &n.advantage.b};
}
inline std::vector<std::vector<double>*> parameter_blocks(PlainDqnNet& n) {
  return {&n.l1.w, &n.l1.b, &n.l2.w, &n.l2.b, &n.head.w, &n.head.b};
}

struct TrainingSample {
  const std::vector<double>* features = nullptr;
  int action = 0;
  double target = 0.0;
};

// Gradients of the mean squared TD error (1/B) sum_j (y_j - Q(s_j, a_j))^2
// with respect to every parameter, propagated through the mean-subtraction
// combine (dQ_a/dG_b = 1{a=b} - 1/|A|) and the relu.
inline double backward(const DuelingNet& net, const std::vector<TrainingSample>& batch,
                       DuelingNet& grads) {
  if (batch.empty()) throw std::invalid_argument("backward needs a non-empty batch");
  grads = DuelingNet::zeros_like(net);
  const int A = net.num_actions();
  const int H = net.hidden_dim();
  const int In = net.input_dim();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  std::vector<double> dg(static_cast<std::size_t>(A));
  std::vector<double> dh(static_cast<std::size_t>(H));
  for (const TrainingSample& s : batch) {
    const std::vector<double>& x = *s.features;
    const DuelingForward f = forward(net, x);
    const double residual = f.q[static_cast<std::size_t>(s.action)] - s.target;
    loss += residual * residual * inv_b;
    const double coef = 2.0 * residual * inv_b;

    // value stream
    grads.value.b[0] += coef;
    for (int u = 0; u < H; ++u) grads.value.w[static_cast<std::size_t>(u)] += coef * f.hidden[static_cast<std::size_t>(u)];

    // advantage stream through the mean subtraction
    for (int a = 0; a < A; ++a)
      dg[static_cast<std::size_t>(a)] = coef * ((a == s.action ? 1.0 : 0.0) - 1.0 / A);
    for (int a = 0; a < A; ++a) {
      const double g = dg[static_cast<std::size_t>(a)];
      grads.advantage.b[static_cast<std::size_t>(a)] += g;
      double* row = &grads.advantage.w[static_cast<std::size_t>(a) * H];
      for (int u = 0; u < H; ++u) row[u] += g * f.hidden[static_cast<std::size_t>(u)];
    }

    // into the shared layer
    for (int u = 0; u < H; ++u) {
      double acc = coef * net.value.w[static_cast<std::size_t>(u)];
      for (int a = 0; a < A; ++a)
        acc += dg[static_cast<std::size_t>(a)] * net.advantage.w[static_cast<std::size_t>(a) * H + u];
      dh[static_cast<std::size_t>(u)] = f.pre[static_cast<std::size_t>(u)] > 0.0 ? acc : 0.0;
    }
    for (int u = 0; u < H; ++u) {
      const double g = dh[static_cast<std::size_t>(u)];
      if (g == 0.0) continue;
      grads.shared.b[static_cast<std::size_t>(u)] += g;
      double* row = &grads.shared.w[static_cast<std::size_t>(u) * In];
      for (int i = 0; i < In; ++i) row[i] += g * x[static_cast<std::size_t>(i)];
    }
  }
  return loss;
}

inline double backward(const PlainDqnNet& net, const std::vector<TrainingSample>& batch,
                       PlainDqnNet& grads) {
  if (batch.empty()) throw std::invalid_argument("backward needs a non-empty batch");
  grads = PlainDqnNet::zeros_like(net);
  const int H1 = net.l1.out;
  const int H2 = net.l2.out;
  const int In = net.input_dim();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  std::vector<double> pre1, h1, pre2, h2, q;
  std::vector<double> dh2(static_cast<std::size_t>(H2)), dh1(static_cast<std::size_t>(H1));
  for (const TrainingSample& s : batch) {
    const std::vector<double>& x = *s.features;
    net.l1.apply(x, pre1);
    h1 = pre1;
    for (double& h : h1) h = h > 0.0 ? h : 0.0;
    net.l2.apply(h1, pre2);
    h2 = pre2;
    for (double& h : h2) h = h > 0.0 ? h : 0.0;
    net.head.apply(h2, q);

    const double residual = q[static_cast<std::size_t>(s.action)] - s.target;
    loss += residual * residual * inv_b;
    const double coef = 2.0 * residual * inv_b;

    grads.head.b[static_cast<std::size_t>(s.action)] += coef;
    {
      double* row = &grads.head.w[static_cast<std::size_t>(s.action) * H2];
      for (int u = 0; u < H2; ++u) row[u] += coef * h2[static_cast<std::size_t>(u)];
    }
    for (int u = 0; u < H2; ++u) {
      const double acc = coef * net.head.w[static_cast<std::size_t>(s.action) * H2 + u];
      dh2[static_cast<std::size_t>(u)] = pre2[static_cast<std::size_t>(u)] > 0.0 ? acc : 0.0;
    }
    for (int u = 0; u < H2; ++u) {
      const double g = dh2[static_cast<std::size_t>(u)];
      if (g == 0.0) continue;
      grads.l2.b[static_cast<std::size_t>(u)] += g;
      double* row = &grads.l2.w[static_cast<std::size_t>(u) * H1];
      for (int i = 0; i < H1; ++i) row[i] += g * h1[static_cast<std::size_t>(i)];
    }
    for (int u = 0; u < H1; ++u) {
      double acc = 0.0;
      for (int v = 0; v < H2; ++v)
        acc += dh2[static_cast<std::size_t>(v)] * net.l2.w[static_cast<std::size_t>(v) * H1 + u];
      dh1[static_cast<std::size_t>(u)] = pre1[static_cast<std::size_t>(u)] > 0.0 ? acc : 0.0;
    }
    for (int u = 0; u < H1; ++u) {
      const double g = dh1[static_cast<std::size_t>(u)];
      if (g == 0.0) continue;
      grads.l1.b[static_cast<std::size_t>(u)] += g;
      double* row = &grads.l1.w[static_cast<std::size_t>(u) * In];
      for (int i = 0; i < In; ++i) row[i] += g * x[static_cast<std::size_t>(i)];
    }
  }
  return loss;
}

// TD target y = r + gamma * max over feasible next actions of the target
// network's Q. The process is continuing, so there is no terminal case.
inline double td_target(double reward, double gamma, const std::vector<double>& target_q_next,
                        const ActionMask& next_mask) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < next_mask.size(); ++i) {
    if (!next_mask[i]) continue;
    any = true;
    best = std::max(best, target_q_next[i]);
  }
  if (!any) throw std::invalid_argument("td_target: no feasible next action");
  return reward + gamma * best;
}

// Adam with the usual bias correction; plain SGD when use_adam is off.
// Gradients are clipped to a global L2 norm first (0 disables).
class GradientDescent {
 public:
  GradientDescent(double lr, bool use_adam, double clip_norm = 10.0)
      : lr_(lr), use_adam_(use_adam), clip_norm_(clip_norm) {}

  template <typename Net>
  void step(Net& net, Net& grads) {
    auto params = parameter_blocks(net);
    auto gs = parameter_blocks(grads);
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t b = 0; b < params.size(); ++b) {
        m_[b].assign(params[b]->size(), 0.0);
        v_[b].assign(params[b]->size(), 0.0);
      }
    }
    if (clip_norm_ > 0.0) {
      double norm2 = 0.0;
      for (auto* g : gs)
        for (double x : *g) norm2 += x * x;
      if (norm2 > clip_norm_ * clip_norm_) {
        const double scale = clip_norm_ / std::sqrt(norm2);
        for (auto* g : gs)
          for (double& x : *g) x *= scale;
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t b = 0; b < params.size(); ++b) {
      std::vector<double>& p = *params[b];
      const std::vector<double>& g = *gs[b];
      if (!use_adam_) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
        continue;
      }
      std::vector<double>& m = m_[b];
      std::vector<double>& v = v_[b];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  bool use_adam_;
  double clip_norm_;
  long long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  ActionMask next_mask;
};

// FIFO ring of transitions with uniform sampling over current contents.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  }

  std::size_t size() const { return store_.size(); }
  std::size_t capacity() const { return capacity_; }

  void push(Transition t) {
    if (store_.size() < capacity_) {
      store_.push_back(std::move(t));
    } else {
      store_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  const Transition& sample(SplitMix64& rng) const {
    return store_[static_cast<std::size_t>(rng.next_below(store_.size()))];
  }
  const Transition& at(std::size_t i) const { return store_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> store_;
};

struct TrainConfig {
  double learning_rate = 0.0001;
  double gamma = 0.99;
  int batch = 16;
  int target_period = 1000;
  int capacity = 10000;
  double epsilon_start = 1.0;
  // Multiplicative per-step decay. Zero (the default) anneals epsilon so the
  // floor is reached at the end of training; at a 4e4-iteration budget that
  // works out to ~0.9999 per step, and the exploration fraction stays intact
  // when iterations are scaled up.
  double epsilon_decay = 0.0;
  double epsilon_floor = 0.01;
  long long iterations = 40000;
  int hidden = 16;
  bool use_adam = true;
  double grad_clip_norm = 10.0;  // 0 disables clipping
  long long eval_every = 2000;   // 0 disables periodic evaluation
  long long eval_slots = 4000;
  // Starting output level for the value head (Q head for the plain net).
  // Anchoring it below 0 keeps untried actions from looking better than
  // experienced ones under all-negative rewards. NaN = leave at 0.
  double value_bias_init = std::numeric_limits<double>::quiet_NaN();
  // Bounds the TD target against bootstrap noise: with rewards in [-M, 0]
  // every true value lies in [-M/(1-gamma), 0], so targets outside that box
  // are artifacts of the max over noisy estimates. NaN = no clamping.
  double target_floor = std::numeric_limits<double>::quiet_NaN();
  double target_ceiling = std::numeric_limits<double>::quiet_NaN();

  double effective_epsilon_decay() const {
    if (epsilon_decay > 0.0) return epsilon_decay;
    if (iterations <= 0 || epsilon_floor <= 0.0 || epsilon_start <= epsilon_floor) return 1.0;
    return std::exp(std::log(epsilon_floor / epsilon_start) / static_cast<double>(iterations));
  }

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (batch < 1 || target_period < 1 || capacity < 1 || hidden < 1)
      throw std::invalid_argument("batch, target_period, capacity, hidden must be positive");
    if (iterations < 0) throw std::invalid_argument("iterations must be non-negative");
    if (!(epsilon_floor <= epsilon_start))
      throw std::invalid_argument("epsilon floor must not exceed epsilon start");
    if (epsilon_decay < 0.0 || epsilon_decay > 1.0)
      throw std::invalid_argument("epsilon_decay must lie in (0, 1] or 0 for auto");
  }
};

struct CurvePoint {
  long long iteration = 0;
  double epsilon = 0.0;
  double loss = 0.0;
  double eval_reward = 0.0;
};

template <typename Net>
struct TrainResult {
  Net net;        // parameters at the final iteration
  Net best_net;   // parameters at the best evaluation point (== net when never evaluated)
  double best_eval = std::numeric_limits<double>::quiet_NaN();
  long long best_iteration = 0;
  std::vector<CurvePoint> curve;
};

// Experience-replay training loop: epsilon-greedy act, store, uniform
// minibatch, gradient step on the squared TD error against a quasi-static
// target copy synced every target_period iterations. Gradient steps start
// once the buffer holds one full batch.
//
// env follows the same concept as the tabular trainer plus features():
//   int action_count() / ActionMask feasible() / double step(int)
//   const std::vector<double>& features()
template <typename Net, typename Env>
TrainResult<Net> train_value_net(Env& env, Net net, const TrainConfig& cfg, std::uint64_t seed,
                                 const std::function<double(const Net&)>& evaluate = {}) {
  cfg.validate();
  SplitMix64 rng = SplitMix64(seed).split(0xac71);
  Net target = net;
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.capacity));
  GradientDescent optimizer(cfg.learning_rate, cfg.use_adam, cfg.grad_clip_norm);
  double epsilon = cfg.epsilon_start;

  std::vector<double> obs = env.features();
  ActionMask mask = env.feasible();
  std::vector<TrainingSample> batch;
  std::vector<const Transition*> picks;
  Net grads = Net::zeros_like(net);

  double loss_sum = 0.0;
  long long loss_count = 0;
  std::vector<CurvePoint> curve;
  const double decay = cfg.effective_epsilon_decay();
  TrainResult<Net> result;
  result.best_net = net;

  for (long long it = 1; it <= cfg.iterations; ++it) {
    const int a = epsilon_greedy(q_values(net, obs), mask, epsilon, rng);
    const double r = env.step(a);
    std::vector<double> next_obs = env.features();
    ActionMask next_mask = env.feasible();
    buffer.push(Transition{std::move(obs), a, r, next_obs, next_mask});
    obs = std::move(next_obs);
    mask = std::move(next_mask);

    if (buffer.size() >= static_cast<std::size_t>(cfg.batch)) {
      picks.clear();
      batch.clear();
      for (int i = 0; i < cfg.batch; ++i) picks.push_back(&buffer.sample(rng));
      for (const Transition* t : picks) {
        double y = td_target(t->reward, cfg.gamma, q_values(target, t->next_state), t->next_mask);
        if (std::isfinite(cfg.target_floor)) y = std::max(y, cfg.target_floor);
        if (std::isfinite(cfg.target_ceiling)) y = std::min(y, cfg.target_ceiling);
        batch.push_back(TrainingSample{&t->state, t->action, y});
      }
      loss_sum += backward(net, batch, grads);
      ++loss_count;
      optimizer.step(net, grads);
    }

    if (it % cfg.target_period == 0) target = net;
    epsilon = std::max(cfg.epsilon_floor, epsilon * decay);

    if (cfg.eval_every > 0 && (it % cfg.eval_every == 0 || it == cfg.iterations)) {
      CurvePoint p;
      p.iteration = it;
      p.epsilon = epsilon;
      p.loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
      p.eval_reward = evaluate ? evaluate(net) : std::numeric_limits<double>::quiet_NaN();
      curve.push_back(p);
      loss_sum = 0.0;
      loss_count = 0;
      if (evaluate && (!std::isfinite(result.best_eval) || p.eval_reward > result.best_eval)) {
        result.best_eval = p.eval_reward;
        result.best_iteration = it;
        result.best_net = net;
      }
    }
  }
  result.curve = std::move(curve);
  if (!std::isfinite(result.best_eval)) result.best_net = net;
  result.net = std::move(net);
  return result;
}

// Greedy reader over a frozen network.
template <typename Net>
class DeepPolicy : public Policy {
 public:
  DeepPolicy(const ActionSpace& space, const SystemConfig& cfg, Net net, std::string name)
      : space_(space), cfg_(cfg), net_(std::move(net)), name_(std::move(name)) {}

  const Action& decide(const SystemState& state, const ActionMask& mask, SplitMix64&) override {
    return space_.at(feasible_argmax(q_values(net_, state_features(state, cfg_)), mask));
  }
  std::string name() const override { return name_; }
  const Net& net() const { return net_; }

 private:
  const ActionSpace& space_;
  const SystemConfig& cfg_;
  Net net_;
  std::string name_;
};

namespace io {

inline void write_block(std::ostream& os, const char* name, const LinearLayer& l) {
  os << name << ' ' << l.out << ' ' << l.in << '\n';
  char buf[64];
  for (int o = 0; o < l.out; ++o) {
    for (int i = 0; i < l.in; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", l.w[static_cast<std::size_t>(o) * l.in + i]);
      os << buf << (i + 1 == l.in ? '\n' : ' ');
    }
  }
  for (int o = 0; o < l.out; ++o) {
    std::snprintf(buf, sizeof(buf), "%.17g", l.b[static_cast<std::size_t>(o)]);
    os << buf << (o + 1 == l.out ? '\n' : ' ');
  }
}

inline LinearLayer read_block(std::istream& is, const std::string& expect) {
  std::string name;
  int out = 0, in = 0;
  if (!(is >> name >> out >> in) || name != expect)
    throw std::runtime_error("checkpoint: expected block " + expect);
  LinearLayer l = LinearLayer::zeros(in, out);
  for (double& v : l.w)
    if (!(is >> v)) throw std::runtime_error("checkpoint: truncated weights in " + expect);
  for (double& v : l.b)
    if (!(is >> v)) throw std::runtime_error("checkpoint: truncated biases in " + expect);
  return l;
}

inline void read_header(std::istream& is, const std::string& expect_kind) {
  std::string magic, kind;
  int version = 0;
  if (!(is >> magic >> version) || magic != "codedge-net" || version != 1)
    throw std::runtime_error("checkpoint: bad magic or version");
  if (!(is >> kind) || kind != expect_kind)
    throw std::runtime_error("checkpoint: expected kind " + expect_kind + ", found " + kind);
}

}  // namespace io

inline void save_net(std::ostream& os, const DuelingNet& net) {
  os << "codedge-net 1\ndueling\ninput " << net.input_dim() << " hidden " << net.hidden_dim()
     << " actions " << net.num_actions() << '\n';
  io::write_block(os, "shared", net.shared);
  io::write_block(os, "value", net.value);
  io::write_block(os, "advantage", net.advantage);
}

inline DuelingNet load_dueling(std::istream& is) {
  io::read_header(is, "dueling");
  std::string k1, k2, k3;
  int input = 0, hidden = 0, actions = 0;
  if (!(is >> k1 >> input >> k2 >> hidden >> k3 >> actions) || k1 != "input" || k2 != "hidden" ||
      k3 != "actions")
    throw std::runtime_error("checkpoint: bad dueling dimensions line");
  DuelingNet net;
  net.shared = io::read_block(is, "shared");
  net.value = io::read_block(is, "value");
  net.advantage = io::read_block(is, "advantage");
  if (net.shared.in != input || net.shared.out != hidden || net.advantage.out != actions ||
      net.value.out != 1 || net.value.in != hidden || net.advantage.in != hidden)
    throw std::runtime_error("checkpoint: dueling dimensions disagree with blocks");
  return net;
}

inline void save_net(std::ostream& os, const PlainDqnNet& net) {
  os << "codedge-net 1\ndqn\ninput " << net.input_dim() << " hidden " << net.l1.out << " actions "
     << net.num_actions() << '\n';
  io::write_block(os, "l1", net.l1);
  io::write_block(os, "l2", net.l2);
  io::write_block(os, "head", net.head);
}

inline PlainDqnNet load_plain_dqn(std::istream& is) {
  io::read_header(is, "dqn");
  std::string k1, k2, k3;
  int input = 0, hidden = 0, actions = 0;
  if (!(is >> k1 >> input >> k2 >> hidden >> k3 >> actions) || k1 != "input" || k2 != "hidden" ||
      k3 != "actions")
    throw std::runtime_error("checkpoint: bad dqn dimensions line");
  PlainDqnNet net;
  net.l1 = io::read_block(is, "l1");
  net.l2 = io::read_block(is, "l2");
  net.head = io::read_block(is, "head");
  if (net.l1.in != input || net.l1.out != hidden || net.head.out != actions)
    throw std::runtime_error("checkpoint: dqn dimensions disagree with blocks");
  return net;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                            bool header = true) {
  if (header) os << "iteration,epsilon,loss,eval_reward\n";
  char buf[160];
  for (const CurvePoint& p : curve) {
    std::snprintf(buf, sizeof(buf), "%lld,%.6g,%.9g,%.9g\n", p.iteration, p.epsilon, p.loss,
                  p.eval_reward);
    os << buf;
  }
}

}  // namespace codedge
