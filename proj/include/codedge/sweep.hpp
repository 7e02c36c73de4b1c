#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedge/config_file.hpp"
#include "codedge/metrics.hpp"
#include "codedge/oracle.hpp"
#include "codedge/policies.hpp"
#include "codedge/training.hpp"

namespace codedge {

// Where learned policies come from when a run needs one: a checkpoint on
// disk, or a fresh training run of `retrain_iterations` steps against the
// evaluation config.
struct PolicySource {
  std::string dueling_checkpoint;
  std::string dqn_checkpoint;
  std::string qlearn_checkpoint;
  long long retrain_iterations = 0;
  long long oracle_reps = 10000;
  LambdaHatScope lambda_hat_scope = LambdaHatScope::AvailableNodes;
  TrainingOverrides training;
};

inline std::unique_ptr<Policy> make_policy(const std::string& name, const ActionSpace& space,
                                           const SystemConfig& cfg, const PolicySource& src,
                                           std::uint64_t seed) {
  auto open_checkpoint = [&](const std::string& path) {
    if (path.empty())
      throw std::runtime_error("policy " + name + " needs a checkpoint or retrain_iterations");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable checkpoint: " + path);
    return in;
  };

  if (name == "greedy") return std::make_unique<GreedyPolicy>(space);
  if (name == "onenode") return std::make_unique<OneNodePolicy>(space);
  if (name == "static") return std::make_unique<StaticCodePolicy>(space, cfg, src.lambda_hat_scope);
  if (name == "random") return std::make_unique<RandomPolicy>(space);
  if (name == "myopic-oracle")
    return std::make_unique<MyopicOraclePolicy>(space, cfg, src.oracle_reps);
  if (name == "qlearn") {
    if (src.retrain_iterations > 0) {
      QLearnConfig qcfg;
      src.training.apply(qcfg);
      qcfg.iterations = src.retrain_iterations;
      return std::make_unique<TabularPolicy>(space, train_tabular(cfg, space, qcfg, seed));
    }
    auto in = open_checkpoint(src.qlearn_checkpoint);
    return std::make_unique<TabularPolicy>(space, QTable::load(in, space.size()));
  }
  if (name == "dueling") {
    if (src.retrain_iterations > 0) {
      TrainConfig tcfg;
      src.training.apply(tcfg);
      tcfg.iterations = src.retrain_iterations;
      tcfg.eval_every = 0;
      return std::make_unique<DeepPolicy<DuelingNet>>(
          space, cfg, train_dueling(cfg, space, tcfg, seed).best_net, "dueling");
    }
    auto in = open_checkpoint(src.dueling_checkpoint);
    return std::make_unique<DeepPolicy<DuelingNet>>(space, cfg, load_dueling(in), "dueling");
  }
  if (name == "dqn") {
    if (src.retrain_iterations > 0) {
      TrainConfig tcfg;
      src.training.apply(tcfg);
      tcfg.iterations = src.retrain_iterations;
      tcfg.eval_every = 0;
      return std::make_unique<DeepPolicy<PlainDqnNet>>(
          space, cfg, train_plain_dqn(cfg, space, tcfg, seed).best_net, "dqn");
    }
    auto in = open_checkpoint(src.dqn_checkpoint);
    return std::make_unique<DeepPolicy<PlainDqnNet>>(space, cfg, load_plain_dqn(in), "dqn");
  }
  throw std::runtime_error("unknown policy name: " + name);
}

struct SweepSpec {
  std::string parameter;  // arrival_prob | per_point_seconds | disconnect_prob_scale |
                          // straggle_rate_scale | task_size_scale
  std::vector<double> values;
  std::vector<std::string> policies;
  std::vector<std::uint64_t> seeds;
  long long eval_slots = 100000;
  long long warmup = 10000;
  PolicySource source;

  void validate() const {
    static const std::set<std::string> params = {"arrival_prob", "per_point_seconds",
                                                 "disconnect_prob_scale", "straggle_rate_scale",
                                                 "task_size_scale"};
    if (!params.count(parameter)) throw std::runtime_error("unknown sweep parameter: " + parameter);
    if (values.empty()) throw std::runtime_error("sweep grid must be non-empty");
    if (std::set<double>(values.begin(), values.end()).size() != values.size())
      throw std::runtime_error("sweep grid values must be distinct");
    if (policies.empty()) throw std::runtime_error("sweep needs at least one policy");
    if (seeds.empty()) throw std::runtime_error("sweep needs at least one seed");
    if (!(eval_slots > warmup && warmup >= 0))
      throw std::runtime_error("sweep needs eval_slots > warmup >= 0");
  }
};

inline SweepSpec parse_sweep_spec(std::istream& is) {
  const auto kv = parse_key_values(is);
  SweepSpec spec;
  static const std::set<std::string> known = {
      "parameter",      "values",         "policies",       "seeds",
      "eval_slots",     "warmup",         "dueling_checkpoint", "dqn_checkpoint",
      "qlearn_checkpoint", "retrain_iterations", "oracle_reps"};
  for (const auto& [key, value] : kv)
    if (!known.count(key)) throw std::runtime_error("unknown sweep key: " + key);

  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("parameter")) spec.parameter = *v;
  if (const auto* v = get("values")) spec.values = detail::to_double_vec("values", *v);
  if (const auto* v = get("policies"))
    for (const std::string& p : detail::split_csv(*v)) spec.policies.push_back(p);
  if (const auto* v = get("seeds"))
    for (const std::string& s : detail::split_csv(*v))
      spec.seeds.push_back(static_cast<std::uint64_t>(detail::to_ll("seeds", s)));
  if (const auto* v = get("eval_slots")) spec.eval_slots = detail::to_ll("eval_slots", *v);
  if (const auto* v = get("warmup")) spec.warmup = detail::to_ll("warmup", *v);
  if (const auto* v = get("dueling_checkpoint")) spec.source.dueling_checkpoint = *v;
  if (const auto* v = get("dqn_checkpoint")) spec.source.dqn_checkpoint = *v;
  if (const auto* v = get("qlearn_checkpoint")) spec.source.qlearn_checkpoint = *v;
  if (const auto* v = get("retrain_iterations"))
    spec.source.retrain_iterations = detail::to_ll("retrain_iterations", *v);
  if (const auto* v = get("oracle_reps")) spec.source.oracle_reps = detail::to_ll("oracle_reps", *v);
  spec.validate();
  return spec;
}

// The sweep axes scale or replace pieces of the base config. The scale axes
// multiply the per-node default vectors; disconnect probabilities stay
// capped below 1.
inline SystemConfig apply_sweep_value(SystemConfig cfg, const std::string& parameter,
                                      double value) {
  if (parameter == "arrival_prob") {
    cfg.arrival_prob = value;
  } else if (parameter == "per_point_seconds") {
    for (double& e : cfg.per_point_seconds) e = value;
  } else if (parameter == "disconnect_prob_scale") {
    for (double& p : cfg.disconnect_probs) p = std::min(p * value, 0.995);
  } else if (parameter == "straggle_rate_scale") {
    for (double& r : cfg.straggle_rates) r *= value;
  } else if (parameter == "task_size_scale") {
    for (int& s : cfg.task_sizes)
      s = std::max(1, static_cast<int>(std::llround(s * value)));
    cfg.f_max = std::max(static_cast<int>(std::llround(cfg.f_max * value)),
                         *std::max_element(cfg.task_sizes.begin(), cfg.task_sizes.end()));
  } else {
    throw std::runtime_error("unknown sweep parameter: " + parameter);
  }
  cfg.validate();
  return cfg;
}

struct SweepRow {
  std::string policy;
  std::string parameter;
  double value = 0.0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SystemConfig& base) {
  spec.validate();
  const ActionSpace space(base.num_nodes);
  std::vector<SweepRow> rows;
  for (const std::string& policy_name : spec.policies) {
    for (double value : spec.values) {
      const SystemConfig cfg = apply_sweep_value(base, spec.parameter, value);
      for (std::uint64_t seed : spec.seeds) {
        auto policy = make_policy(policy_name, space, cfg, spec.source, seed);
        SweepRow row;
        row.policy = policy_name;
        row.parameter = spec.parameter;
        row.value = value;
        row.seed = seed;
        row.metrics = evaluate_policy(cfg, space, *policy, spec.eval_slots, spec.warmup, seed);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "policy,param,value,seed,avg_queue,drop_rate,avg_delay_slots,avg_delay_seconds,throughput\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%llu,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.policy.c_str(), r.parameter.c_str(), r.value,
                  static_cast<unsigned long long>(r.seed), r.metrics.avg_queue_occupancy,
                  r.metrics.drop_rate, r.metrics.avg_delay_slots, r.metrics.avg_delay_seconds,
                  r.metrics.throughput);
    os << buf;
  }
}

}  // namespace codedge
