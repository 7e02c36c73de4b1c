#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "codedge/action_space.hpp"
#include "codedge/config_file.hpp"
#include "codedge/metrics.hpp"
#include "codedge/oracle.hpp"
#include "codedge/svg_plot.hpp"
#include "codedge/sweep.hpp"
#include "codedge/training.hpp"

namespace {

codedge::FileConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return codedge::FileConfig{};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return codedge::load_config(in);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void print_metrics(const codedge::RunMetrics& m) {
  std::printf("avg_queue=%.6g\n", m.avg_queue_occupancy);
  std::printf("drop_rate=%.6g\n", m.drop_rate);
  std::printf("drops_per_arrival=%.6g\n", m.drops_per_arrival);
  std::printf("avg_delay_slots=%.6g\n", m.avg_delay_slots);
  std::printf("avg_delay_seconds=%.6g\n", m.avg_delay_seconds);
  std::printf("throughput=%.6g\n", m.throughput);
  std::printf("slots_run=%lld\n", m.slots_run);
  std::printf("warmup_slots=%lld\n", m.warmup_slots);
}

int run_train(const std::string& algo, const std::string& config_path, std::uint64_t seed,
              long long iterations, const std::string& out_dir) {
  const codedge::FileConfig fc = load_config_or_default(config_path);
  const codedge::ActionSpace space(fc.system.num_nodes);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);

  if (algo == "qlearn") {
    codedge::QLearnConfig qcfg;
    fc.training.apply(qcfg);
    if (iterations >= 0) qcfg.iterations = iterations;
    const codedge::QTable table = codedge::train_tabular(fc.system, space, qcfg, seed);
    std::ofstream os(out / "qtable.txt");
    table.save(os);
    std::printf("saved %s (%zu states)\n", (out / "qtable.txt").c_str(), table.num_states());
    codedge::TabularPolicy policy(space, table);
    print_metrics(codedge::evaluate_policy(fc.system, space, policy, 20000, 2000, seed + 999));
    return 0;
  }

  codedge::TrainConfig tcfg;
  fc.training.apply(tcfg);
  if (iterations >= 0) tcfg.iterations = iterations;

  if (algo == "dueling") {
    auto result = codedge::train_dueling(fc.system, space, tcfg, seed);
    std::ofstream os(out / "dueling.txt");
    codedge::save_net(os, result.best_net);
    std::ofstream curve(out / "training_curve.csv");
    codedge::write_curve_csv(curve, result.curve);
    std::printf("saved %s\n", (out / "dueling.txt").c_str());
    codedge::DeepPolicy<codedge::DuelingNet> policy(space, fc.system, result.best_net, "dueling");
    print_metrics(codedge::evaluate_policy(fc.system, space, policy, 20000, 2000, seed + 999));
    return 0;
  }
  if (algo == "dqn") {
    auto result = codedge::train_plain_dqn(fc.system, space, tcfg, seed);
    std::ofstream os(out / "dqn.txt");
    codedge::save_net(os, result.best_net);
    std::ofstream curve(out / "training_curve.csv");
    codedge::write_curve_csv(curve, result.curve);
    std::printf("saved %s\n", (out / "dqn.txt").c_str());
    codedge::DeepPolicy<codedge::PlainDqnNet> policy(space, fc.system, result.best_net, "dqn");
    print_metrics(codedge::evaluate_policy(fc.system, space, policy, 20000, 2000, seed + 999));
    return 0;
  }
  throw std::runtime_error("unknown algorithm: " + algo);
}

int run_eval(const std::string& policy_name, const std::string& checkpoint,
             const std::string& config_path, std::uint64_t seed, long long slots,
             long long warmup) {
  const codedge::FileConfig fc = load_config_or_default(config_path);
  const codedge::ActionSpace space(fc.system.num_nodes);
  codedge::PolicySource src;
  src.lambda_hat_scope = fc.lambda_hat_scope;
  src.oracle_reps = fc.oracle_reps;
  src.dueling_checkpoint = checkpoint;
  src.dqn_checkpoint = checkpoint;
  src.qlearn_checkpoint = checkpoint;
  auto policy = codedge::make_policy(policy_name, space, fc.system, src, seed);
  print_metrics(codedge::evaluate_policy(fc.system, space, *policy, slots, warmup, seed));
  return 0;
}

int run_sweep_cmd(const std::string& spec_path, const std::string& config_path,
                  const std::string& out_dir, bool plot) {
  std::ifstream spec_in(spec_path);
  if (!spec_in) throw std::runtime_error("cannot open sweep spec: " + spec_path);
  const codedge::SweepSpec spec = codedge::parse_sweep_spec(spec_in);
  const codedge::FileConfig fc = load_config_or_default(config_path);

  const auto rows = codedge::run_sweep(spec, fc.system);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);
  {
    std::ofstream os(out / "sweep.csv");
    codedge::write_sweep_csv(os, rows);
  }
  std::printf("wrote %s (%zu rows)\n", (out / "sweep.csv").c_str(), rows.size());

  if (plot) {
    for (const char* metric : {"avg_queue", "drop_rate", "avg_delay_slots"}) {
      std::ifstream csv(out / "sweep.csv");
      codedge::PlotSpec ps{"value", metric, "policy"};
      write_file(out / (std::string(metric) + ".svg"), codedge::render_line_chart(csv, ps));
    }
    std::printf("wrote plots to %s\n", out.c_str());
  }
  return 0;
}

int run_oracle_check(const std::string& config_path, int task_size, long long reps,
                     std::uint64_t seed) {
  const codedge::FileConfig fc = load_config_or_default(config_path);
  const codedge::ActionSpace space(fc.system.num_nodes);
  const std::uint32_t all = (1u << fc.system.num_nodes) - 1;
  codedge::SplitMix64 rng(seed);
  auto estimates = codedge::estimate_all_actions(fc.system, space, task_size, all, reps, rng);
  std::sort(estimates.begin(), estimates.end(),
            [](const auto& a, const auto& b) { return a.mean_seconds < b.mean_seconds; });
  std::printf("action_index,n,k,subset,mean_seconds,half_width_95\n");
  for (const auto& e : estimates) {
    std::string subset;
    for (std::size_t i = 0; i < e.action.nodes.size(); ++i) {
      if (i) subset += '|';
      subset += std::to_string(e.action.nodes[i]);
    }
    std::printf("%d,%d,%d,%s,%.6g,%.6g\n", e.action.global_index, e.action.n, e.action.k,
                subset.c_str(), e.mean_seconds, e.half_width_95);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded task scheduling over unreliable edge nodes: simulator, baselines, and RL"};
  app.require_subcommand(1);

  std::string algo, config_path, out_dir = "out", policy_name, checkpoint, spec_path;
  std::uint64_t seed = 1;
  long long iterations = -1, slots = 100000, warmup = 10000, reps = 100000;
  int task_size = 200;
  int num_nodes = 5;
  bool plot = false;

  auto* train = app.add_subcommand("train", "Train a policy and write its checkpoint");
  train->add_option("--algo", algo, "qlearn | dueling | dqn")->required();
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--iterations", iterations, "override training iterations");
  train->add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a policy on the simulator");
  eval->add_option("--policy", policy_name,
                   "greedy | onenode | static | random | qlearn | dueling | dqn | myopic-oracle")
      ->required();
  eval->add_option("--checkpoint", checkpoint, "checkpoint file for learned policies");
  eval->add_option("--config", config_path, "key=value config file");
  eval->add_option("--seed", seed, "evaluation seed");
  eval->add_option("--slots", slots, "total slots to simulate");
  eval->add_option("--warmup", warmup, "slots excluded from metrics");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  sweep->add_option("--spec", spec_path, "sweep spec file")->required();
  sweep->add_option("--config", config_path, "base config file");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_flag("--plot", plot, "also emit SVG charts");

  auto* oracle = app.add_subcommand("oracle-check", "Rank all actions by Monte-Carlo serving time");
  oracle->add_option("--config", config_path, "key=value config file");
  oracle->add_option("--task-size", task_size, "task size in data points");
  oracle->add_option("--reps", reps, "Monte-Carlo replications");
  oracle->add_option("--seed", seed, "sampling seed");

  std::string actions_out;
  auto* actions = app.add_subcommand("actions", "Export the action index table as CSV");
  actions->add_option("--num-nodes", num_nodes, "number of nodes");
  actions->add_option("--out", actions_out, "output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(algo, config_path, seed, iterations, out_dir);
    if (eval->parsed()) return run_eval(policy_name, checkpoint, config_path, seed, slots, warmup);
    if (sweep->parsed()) return run_sweep_cmd(spec_path, config_path, out_dir, plot);
    if (oracle->parsed()) return run_oracle_check(config_path, task_size, reps, seed);
    if (actions->parsed()) {
      const codedge::ActionSpace space(num_nodes);
      if (actions_out.empty()) {
        space.write_csv(std::cout);
      } else {
        std::ofstream os(actions_out);
        if (!os) throw std::runtime_error("cannot write " + actions_out);
        space.write_csv(os);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
