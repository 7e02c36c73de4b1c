#pragma once

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedge/config.hpp"
#include "codedge/dueling.hpp"
#include "codedge/policies.hpp"
#include "codedge/qlearning.hpp"

namespace codedge {

// Flat key=value text. '#' starts a comment; blank lines are fine; unknown
// keys are errors.
inline std::map<std::string, std::string> parse_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    if (kv.count(key)) throw std::runtime_error("duplicate config key: " + key);
    kv[key] = value;
  }
  return kv;
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": not a number: " + v);
  }
  if (pos != v.size()) throw std::runtime_error("config key " + key + ": trailing junk: " + v);
  return d;
}

inline long long to_ll(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  const auto ll = static_cast<long long>(d);
  if (static_cast<double>(ll) != d)
    throw std::runtime_error("config key " + key + ": expected an integer: " + v);
  return ll;
}

inline std::vector<std::string> split_csv(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

inline std::vector<double> to_double_vec(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& s : split_csv(v)) out.push_back(to_double(key, s));
  if (out.empty()) throw std::runtime_error("config key " + key + ": empty list");
  return out;
}

inline std::vector<int> to_int_vec(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (long long x : [&] {
         std::vector<long long> ll;
         for (const std::string& s : split_csv(v)) ll.push_back(to_ll(key, s));
         return ll;
       }())
    out.push_back(static_cast<int>(x));
  if (out.empty()) throw std::runtime_error("config key " + key + ": empty list");
  return out;
}

// Length-1 per-node vectors broadcast to all nodes.
inline std::vector<double> fit_nodes(const std::string& key, std::vector<double> v, int n) {
  if (v.size() == 1) v.assign(static_cast<std::size_t>(n), v[0]);
  if (v.size() != static_cast<std::size_t>(n))
    throw std::runtime_error("config key " + key + ": expected 1 or num_nodes values");
  return v;
}

}  // namespace detail

// Training knobs from a config file. Which algorithm they apply to is the
// caller's choice; unset fields keep that algorithm's defaults (the tabular
// and deep defaults differ).
struct TrainingOverrides {
  std::optional<double> learning_rate, gamma;
  std::optional<double> epsilon_start, epsilon_decay, epsilon_floor;
  std::optional<long long> iterations, eval_every, eval_slots;
  std::optional<int> batch, target_period, capacity, hidden;
  std::optional<bool> use_adam;
  std::optional<TauSchedule> tau_schedule;
  std::optional<double> tau_c, tau_d;

  void apply(TrainConfig& cfg) const {
    if (learning_rate) cfg.learning_rate = *learning_rate;
    if (gamma) cfg.gamma = *gamma;
    if (epsilon_start) cfg.epsilon_start = *epsilon_start;
    if (epsilon_decay) cfg.epsilon_decay = *epsilon_decay;
    if (epsilon_floor) cfg.epsilon_floor = *epsilon_floor;
    if (iterations) cfg.iterations = *iterations;
    if (eval_every) cfg.eval_every = *eval_every;
    if (eval_slots) cfg.eval_slots = *eval_slots;
    if (batch) cfg.batch = *batch;
    if (target_period) cfg.target_period = *target_period;
    if (capacity) cfg.capacity = *capacity;
    if (hidden) cfg.hidden = *hidden;
    if (use_adam) cfg.use_adam = *use_adam;
  }

  void apply(QLearnConfig& cfg) const {
    if (learning_rate) cfg.learning_rate = *learning_rate;
    if (gamma) cfg.gamma = *gamma;
    if (epsilon_start) cfg.epsilon_start = *epsilon_start;
    if (epsilon_decay) cfg.epsilon_decay = *epsilon_decay;
    if (epsilon_floor) cfg.epsilon_floor = *epsilon_floor;
    if (iterations) cfg.iterations = *iterations;
    if (tau_schedule) cfg.tau_schedule = *tau_schedule;
    if (tau_c) cfg.tau_c = *tau_c;
    if (tau_d) cfg.tau_d = *tau_d;
  }
};

struct FileConfig {
  SystemConfig system;
  TrainingOverrides training;
  LambdaHatScope lambda_hat_scope = LambdaHatScope::AvailableNodes;
  long long oracle_reps = 10000;
};

inline FileConfig load_config(std::istream& is) {
  const auto kv = parse_key_values(is);
  FileConfig fc;
  using detail::fit_nodes;
  using detail::to_double;
  using detail::to_double_vec;
  using detail::to_int_vec;
  using detail::to_ll;

  static const std::set<std::string> known = {
      "num_nodes",       "queue_capacity", "arrival_prob",     "slot_seconds",
      "task_sizes",      "disconnect_probs", "straggle_rates", "per_point_seconds",
      "f_max",           "learning_rate",  "gamma",            "batch",
      "target_period",   "capacity",       "epsilon_start",    "epsilon_decay",
      "epsilon_floor",   "iterations",     "hidden",           "optimizer",
      "eval_every",      "eval_slots",     "tau_schedule",     "tau_c",
      "tau_d",           "lambda_hat_scope", "oracle_reps"};
  for (const auto& [key, value] : kv)
    if (!known.count(key)) throw std::runtime_error("unknown config key: " + key);

  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  SystemConfig& sys = fc.system;
  if (auto v = get("num_nodes")) sys.num_nodes = static_cast<int>(to_ll("num_nodes", *v));
  if (auto v = get("queue_capacity")) sys.queue_capacity = static_cast<int>(to_ll("queue_capacity", *v));
  if (auto v = get("arrival_prob")) sys.arrival_prob = to_double("arrival_prob", *v);
  if (auto v = get("slot_seconds")) sys.slot_seconds = to_double("slot_seconds", *v);
  if (auto v = get("task_sizes")) sys.task_sizes = to_int_vec("task_sizes", *v);
  if (sys.num_nodes != 5) {
    // defaults are the 5-node reference fleet; other sizes need explicit vectors
    sys.disconnect_probs.clear();
    sys.straggle_rates.clear();
    sys.per_point_seconds.clear();
  }
  if (auto v = get("disconnect_probs"))
    sys.disconnect_probs = fit_nodes("disconnect_probs", to_double_vec("disconnect_probs", *v), sys.num_nodes);
  if (auto v = get("straggle_rates"))
    sys.straggle_rates = fit_nodes("straggle_rates", to_double_vec("straggle_rates", *v), sys.num_nodes);
  if (auto v = get("per_point_seconds"))
    sys.per_point_seconds =
        fit_nodes("per_point_seconds", to_double_vec("per_point_seconds", *v), sys.num_nodes);
  if (auto v = get("f_max")) {
    sys.f_max = static_cast<int>(to_ll("f_max", *v));
  } else if (get("task_sizes")) {
    sys.f_max = *std::max_element(sys.task_sizes.begin(), sys.task_sizes.end());
  }
  sys.validate();

  TrainingOverrides& tr = fc.training;
  if (auto v = get("learning_rate")) tr.learning_rate = to_double("learning_rate", *v);
  if (auto v = get("gamma")) tr.gamma = to_double("gamma", *v);
  if (auto v = get("batch")) tr.batch = static_cast<int>(to_ll("batch", *v));
  if (auto v = get("target_period")) tr.target_period = static_cast<int>(to_ll("target_period", *v));
  if (auto v = get("capacity")) tr.capacity = static_cast<int>(to_ll("capacity", *v));
  if (auto v = get("epsilon_start")) tr.epsilon_start = to_double("epsilon_start", *v);
  if (auto v = get("epsilon_decay")) tr.epsilon_decay = to_double("epsilon_decay", *v);
  if (auto v = get("epsilon_floor")) tr.epsilon_floor = to_double("epsilon_floor", *v);
  if (auto v = get("iterations")) tr.iterations = to_ll("iterations", *v);
  if (auto v = get("hidden")) tr.hidden = static_cast<int>(to_ll("hidden", *v));
  if (auto v = get("eval_every")) tr.eval_every = to_ll("eval_every", *v);
  if (auto v = get("eval_slots")) tr.eval_slots = to_ll("eval_slots", *v);
  if (auto v = get("tau_c")) tr.tau_c = to_double("tau_c", *v);
  if (auto v = get("tau_d")) tr.tau_d = to_double("tau_d", *v);
  if (auto v = get("optimizer")) {
    if (*v == "adam") tr.use_adam = true;
    else if (*v == "sgd") tr.use_adam = false;
    else throw std::runtime_error("config key optimizer: expected adam or sgd");
  }
  if (auto v = get("tau_schedule")) {
    if (*v == "constant") tr.tau_schedule = TauSchedule::Constant;
    else if (*v == "robbins_monro") tr.tau_schedule = TauSchedule::RobbinsMonro;
    else throw std::runtime_error("config key tau_schedule: expected constant or robbins_monro");
  }
  if (auto v = get("lambda_hat_scope")) {
    if (*v == "available") fc.lambda_hat_scope = LambdaHatScope::AvailableNodes;
    else if (*v == "all") fc.lambda_hat_scope = LambdaHatScope::AllNodes;
    else throw std::runtime_error("config key lambda_hat_scope: expected available or all");
  }
  if (auto v = get("oracle_reps")) fc.oracle_reps = to_ll("oracle_reps", *v);
  return fc;
}

}  // namespace codedge
