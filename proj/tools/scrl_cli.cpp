// scrl command-line surface: sidecar scoring of rollout logs (`score`),
// synthetic-policy simulation (`simulate`), and threshold sweeps (`sweep`).
// Exit codes: 0 success, 2 usage error, 3 validation error, 4 I/O error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scrl/scrl.hpp"

namespace {

struct LabelingFlags {
  std::optional<double> tau_pos, tau_marg, tau_neg, lambda_h;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tau-pos", tau_pos, "Positive-label support threshold");
    cmd->add_option("--tau-marg", tau_marg, "Positive-label margin threshold");
    cmd->add_option("--tau-neg", tau_neg, "Negative-label support threshold");
    cmd->add_option("--lambda-h", lambda_h, "Uncertainty penalty weight");
  }

  void apply(scrl::LabelingConfig& cfg) const {
    if (tau_pos) cfg.tau_pos = *tau_pos;
    if (tau_marg) cfg.tau_marg = *tau_marg;
    if (tau_neg) cfg.tau_neg = *tau_neg;
    if (lambda_h) cfg.lambda_h = *lambda_h;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw scrl::IoError("cannot open output file " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw scrl::IoError("cannot open input file " + path);
  return in;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw scrl::IoError("write failure on " + path);
}

// ---------------------------------------------------------------- score ----

struct ScoreArgs {
  std::string input;
  std::string output;
  LabelingFlags labeling;
  std::optional<std::size_t> candidates;  // keep only the first N rollouts per group
  std::optional<std::size_t> train_size;
  std::uint64_t seed = 0;
  std::string method = "scrl";
  std::string invalid_reward = "penalty";
};

int run_score(const ScoreArgs& args) {
  scrl::ScoreOptions opt;
  args.labeling.apply(opt.labeling);
  opt.train_size = args.train_size;
  opt.seed = args.seed;
  opt.method = scrl::parse_method(args.method);
  if (args.invalid_reward == "penalty")
    opt.invalid_policy = scrl::InvalidRewardPolicy::penalize;
  else if (args.invalid_reward == "zero")
    opt.invalid_policy = scrl::InvalidRewardPolicy::zero;
  else
    throw scrl::ValidationError("--invalid-reward must be penalty or zero");

  std::ifstream in = open_input(args.input);
  std::ofstream out = open_output(args.output);

  std::size_t queries = 0, rollouts = 0, scored = 0;
  std::size_t positives = 0, negative_labels = 0, queries_with_negatives = 0;
  double reward_sum = 0.0;
  double reward_min = 0.0, reward_max = 0.0;

  scrl::GroupReader reader(in);
  while (auto group = reader.next()) {
    if (args.candidates && group->size() > *args.candidates)
      group->rollouts.resize(*args.candidates);
    const scrl::ScoredGroup result = scrl::score_group(*group, opt);
    scrl::write_reward_records(out, result);

    ++queries;
    rollouts += group->size();
    if (result.decision.positive) ++positives;
    if (!result.decision.negatives.empty()) ++queries_with_negatives;
    negative_labels += result.decision.negatives.size();
    for (const scrl::RewardedRollout& r : result.records) {
      reward_min = scored == 0 ? r.reward : std::min(reward_min, r.reward);
      reward_max = scored == 0 ? r.reward : std::max(reward_max, r.reward);
      reward_sum += r.reward;
      ++scored;
    }
  }
  finish_output(out, args.output);

  const double abstention =
      queries > 0 ? 1.0 - static_cast<double>(positives) / static_cast<double>(queries) : 0.0;
  std::cout << "queries: " << queries << '\n'
            << "rollouts: " << rollouts << '\n'
            << "scored_rollouts: " << scored << '\n'
            << "positive_labels: " << positives << '\n'
            << "abstention_rate: " << scrl::format_double(abstention) << '\n'
            << "queries_with_negatives: " << queries_with_negatives << '\n'
            << "negative_labels: " << negative_labels << '\n'
            << "reward_mean: "
            << scrl::format_double(scored > 0 ? reward_sum / static_cast<double>(scored) : 0.0)
            << '\n'
            << "reward_min: " << scrl::format_double(scored > 0 ? reward_min : 0.0) << '\n'
            << "reward_max: " << scrl::format_double(scored > 0 ? reward_max : 0.0) << '\n';
  return 0;
}

// ------------------------------------------------------------- simulate ----

struct SimulateArgs {
  std::string config;
  std::string out_prefix = "metrics";
  LabelingFlags labeling;
  std::optional<int> candidates;
  std::optional<int> train_size;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> learning_rate;
};

scrl::SimConfig simulate_config(const SimulateArgs& args) {
  scrl::SimConfig cfg = scrl::sim_config_from(scrl::ConfigDoc::load_file(args.config));
  args.labeling.apply(cfg.labeling);
  if (args.candidates) cfg.rollout_budget = *args.candidates;
  if (args.train_size) cfg.train_size = *args.train_size;
  if (args.iterations) cfg.iterations = *args.iterations;
  if (args.seed) cfg.seed = *args.seed;
  if (args.method) cfg.method = scrl::parse_method(*args.method);
  if (args.learning_rate) cfg.learning_rate = *args.learning_rate;
  scrl::validate(cfg);
  return cfg;
}

void print_record(const scrl::IterationRecord& r) {
  std::cout << "iteration " << r.iteration << ": greedy_accuracy=" << scrl::format_double(r.greedy_accuracy)
            << " mean_reward=" << scrl::format_double(r.mean_reward)
            << " positive_label_accuracy=" << scrl::format_double(r.positive_label_accuracy)
            << " positive_label_ratio=" << scrl::format_double(r.positive_label_ratio)
            << " negative_label_accuracy=" << scrl::format_double(r.negative_label_accuracy)
            << " mean_negatives_per_query=" << scrl::format_double(r.mean_negatives_per_query)
            << " majority_label_accuracy=" << scrl::format_double(r.majority_label_accuracy)
            << '\n';
}

int run_simulate(const SimulateArgs& args) {
  const scrl::SimConfig cfg = simulate_config(args);
  const scrl::SimMetrics metrics = scrl::run_simulation(cfg);

  const std::string jsonl_path = args.out_prefix + ".jsonl";
  const std::string csv_path = args.out_prefix + ".csv";
  std::ofstream jsonl = open_output(jsonl_path);
  scrl::write_metrics_jsonl(jsonl, metrics);
  finish_output(jsonl, jsonl_path);
  std::ofstream csv = open_output(csv_path);
  scrl::write_metrics_csv(csv, metrics);
  finish_output(csv, csv_path);

  print_record(metrics.records.back());
  return 0;
}

// ---------------------------------------------------------------- sweep ----

struct SweepArgs {
  std::string config;
  std::string output = "sweep.csv";
  LabelingFlags labeling;
  std::optional<int> candidates;
  std::optional<int> train_size;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::vector<double> grid_tau_pos, grid_tau_marg, grid_tau_neg, grid_lambda_h;
};

int run_sweep(const SweepArgs& args) {
  scrl::SimConfig base = scrl::sim_config_from(scrl::ConfigDoc::load_file(args.config));
  args.labeling.apply(base.labeling);
  if (args.candidates) base.rollout_budget = *args.candidates;
  if (args.train_size) base.train_size = *args.train_size;
  if (args.iterations) base.iterations = *args.iterations;
  if (args.seed) base.seed = *args.seed;
  if (args.method) base.method = scrl::parse_method(*args.method);

  // Grid dimensions default to the base value; every run shares the base seed
  // so cells differ only in thresholds.
  const auto dim = [](const std::vector<double>& grid, double fallback) {
    return grid.empty() ? std::vector<double>{fallback} : grid;
  };
  const std::vector<double> tau_pos = dim(args.grid_tau_pos, base.labeling.tau_pos);
  const std::vector<double> tau_marg = dim(args.grid_tau_marg, base.labeling.tau_marg);
  const std::vector<double> tau_neg = dim(args.grid_tau_neg, base.labeling.tau_neg);
  const std::vector<double> lambda_h = dim(args.grid_lambda_h, base.labeling.lambda_h);

  std::ofstream out = open_output(args.output);
  out << "tau_pos,tau_marg,tau_neg,lambda_h,final_greedy_accuracy,final_positive_label_accuracy,"
         "final_negative_label_accuracy,mean_positive_label_accuracy,mean_negative_label_accuracy,"
         "max_mean_negatives_per_query,mean_reward\n";

  for (double tp : tau_pos)
    for (double tm : tau_marg)
      for (double tn : tau_neg)
        for (double lh : lambda_h) {
          scrl::SimConfig cfg = base;
          cfg.labeling = scrl::LabelingConfig{tp, tm, tn, lh};
          scrl::validate(cfg);
          const scrl::SimMetrics metrics = scrl::run_simulation(cfg);

          double pos_acc = 0.0, neg_acc = 0.0, reward = 0.0, max_negatives = 0.0;
          for (const scrl::IterationRecord& r : metrics.records) {
            pos_acc += r.positive_label_accuracy;
            neg_acc += r.negative_label_accuracy;
            reward += r.mean_reward;
            max_negatives = std::max(max_negatives, r.mean_negatives_per_query);
          }
          const double n = static_cast<double>(metrics.records.size());
          const scrl::IterationRecord& last = metrics.records.back();
          out << scrl::format_double(tp) << ',' << scrl::format_double(tm) << ','
              << scrl::format_double(tn) << ',' << scrl::format_double(lh) << ','
              << scrl::format_double(last.greedy_accuracy) << ','
              << scrl::format_double(last.positive_label_accuracy) << ','
              << scrl::format_double(last.negative_label_accuracy) << ','
              << scrl::format_double(pos_acc / n) << ',' << scrl::format_double(neg_acc / n) << ','
              << scrl::format_double(max_negatives) << ',' << scrl::format_double(reward / n)
              << '\n';
        }
  finish_output(out, args.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward estimation for unsupervised test-time reinforcement learning"};
  app.require_subcommand(1);

  ScoreArgs score;
  CLI::App* score_cmd = app.add_subcommand("score", "Score a rollout JSONL log into reward records");
  score_cmd->add_option("--input,-i", score.input, "Rollout JSONL file, grouped by query_id")->required();
  score_cmd->add_option("--out,-o", score.output, "Reward JSONL output path")->required();
  score.labeling.attach(score_cmd);
  score_cmd->add_option("--candidates", score.candidates,
                        "Use only the first N rollouts of each group as the candidate set");
  score_cmd->add_option("--train-size", score.train_size,
                        "Downsample each group to this many training rollouts");
  score_cmd->add_option("--seed", score.seed, "Seed for downsampling (default 0)");
  score_cmd->add_option("--method", score.method, "Reward method: scrl (default) or ttrl");
  score_cmd->add_option("--invalid-reward", score.invalid_reward,
                        "Reward policy for rollouts without an answer: penalty (default) or zero");

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the synthetic-policy simulator");
  sim_cmd->add_option("--config,-c", sim.config, "Simulation config file")->required();
  sim_cmd->add_option("--out,-o", sim.out_prefix, "Output prefix; writes <out>.jsonl and <out>.csv");
  sim.labeling.attach(sim_cmd);
  sim_cmd->add_option("--candidates", sim.candidates, "Candidate rollouts per query per iteration");
  sim_cmd->add_option("--train-size", sim.train_size, "Training rollouts per query per iteration");
  sim_cmd->add_option("--iterations", sim.iterations, "Training iterations");
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--method", sim.method, "scrl or ttrl");
  sim_cmd->add_option("--learning-rate", sim.learning_rate, "Gradient step size");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a threshold grid of simulations");
  sweep_cmd->add_option("--config,-c", sweep.config, "Base simulation config file")->required();
  sweep_cmd->add_option("--out,-o", sweep.output, "Sweep CSV output path");
  sweep.labeling.attach(sweep_cmd);
  sweep_cmd->add_option("--candidates", sweep.candidates, "Candidate rollouts per query per iteration");
  sweep_cmd->add_option("--train-size", sweep.train_size, "Training rollouts per query per iteration");
  sweep_cmd->add_option("--iterations", sweep.iterations, "Training iterations");
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed shared by all cells");
  sweep_cmd->add_option("--method", sweep.method, "scrl or ttrl");
  sweep_cmd->add_option("--grid-tau-pos", sweep.grid_tau_pos, "Grid values for tau_pos")->delimiter(',');
  sweep_cmd->add_option("--grid-tau-marg", sweep.grid_tau_marg, "Grid values for tau_marg")->delimiter(',');
  sweep_cmd->add_option("--grid-tau-neg", sweep.grid_tau_neg, "Grid values for tau_neg")->delimiter(',');
  sweep_cmd->add_option("--grid-lambda-h", sweep.grid_lambda_h, "Grid values for lambda_h")->delimiter(',');

  try {
    app.parse(argc, argv);
    if (score_cmd->parsed()) return run_score(score);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (sweep_cmd->parsed()) {
      if (sweep.grid_tau_pos.empty() && sweep.grid_tau_marg.empty() && sweep.grid_tau_neg.empty() &&
          sweep.grid_lambda_h.empty())
        throw CLI::RequiredError("at least one --grid-* option");
      return run_sweep(sweep);
    }
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const scrl::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const scrl::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const scrl::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
