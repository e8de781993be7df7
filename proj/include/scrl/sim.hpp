#pragma once

// Synthetic categorical-policy simulator ("answer bandit"). Each query is a
// K-way answer distribution parameterized by logits; trajectories are a
// single answer decision, so the policy-ratio product of the clipped
// surrogate collapses to pi(a)/pi_old(a). Rollout entropies are drawn from a
// two-mode normal model (correct vs incorrect answers) truncated at 0.
// The simulator drives the exact consensus/labeling/reward code used for log
// scoring, so label-quality and convergence dynamics exercise the real
// implementation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scrl/config.hpp"
#include "scrl/pipeline.hpp"
#include "scrl/reward.hpp"
#include "scrl/rng.hpp"

namespace scrl {

// Trajectory-entropy model: correct answers generate with lower mean entropy
// than incorrect ones. Defaults are calibrated so the two distributions
// overlap; the gate has to be non-trivially right, not trivially separable.
struct EntropyModel {
  double mu_correct = 0.23;
  double mu_incorrect = 0.29;
  double sigma = 0.05;
};

// Initial per-query policy concentration.
struct InitSpec {
  enum class Kind { uniform, dirichlet, explicit_probs };

  Kind kind = Kind::uniform;
  double alpha = 1.0;         // dirichlet concentration
  std::vector<double> probs;  // explicit: normalized and broadcast to every query

  // "uniform" | "dirichlet:<alpha>" | "explicit:<p1>,<p2>,..."
  static InitSpec parse(std::string_view text) {
    InitSpec spec;
    if (text == "uniform") return spec;
    if (text.starts_with("dirichlet:")) {
      spec.kind = Kind::dirichlet;
      try {
        spec.alpha = std::stod(std::string(text.substr(10)));
      } catch (const std::exception&) {
        throw ValidationError("init_logits: bad dirichlet alpha in '" + std::string(text) + "'");
      }
      if (!(spec.alpha > 0.0)) throw ValidationError("init_logits: dirichlet alpha must be > 0");
      return spec;
    }
    if (text.starts_with("explicit:")) {
      spec.kind = Kind::explicit_probs;
      std::stringstream ss{std::string(text.substr(9))};
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          spec.probs.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ValidationError("init_logits: bad probability '" + item + "'");
        }
      }
      if (spec.probs.empty()) throw ValidationError("init_logits: explicit list is empty");
      for (double p : spec.probs)
        if (!(p > 0.0)) throw ValidationError("init_logits: explicit probabilities must be > 0");
      return spec;
    }
    throw ValidationError("init_logits: expected uniform, dirichlet:<alpha> or explicit:<p1,p2,...>");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::uniform: return "uniform";
      case Kind::dirichlet: return "dirichlet:" + std::to_string(alpha);
      case Kind::explicit_probs: {
        std::string s = "explicit:";
        for (std::size_t i = 0; i < probs.size(); ++i) {
          if (i) s += ',';
          s += std::to_string(probs[i]);
        }
        return s;
      }
    }
    return "uniform";
  }
};

struct SimConfig {
  int num_queries = 100;
  int answers_per_query = 8;      // K
  std::vector<int> ground_truth;  // per query; a single value broadcasts
  InitSpec init{};
  EntropyModel entropy{};
  int rollout_budget = 64;  // N candidates per query per iteration
  int train_size = 32;      // G <= N
  int iterations = 100;     // T
  double learning_rate = 0.5;
  RewardMethod method = RewardMethod::scrl;
  LabelingConfig labeling{};
  double clip_eps = 0.2;
  int inner_epochs = 1;
  std::uint64_t seed = 0;
};

inline void validate(const SimConfig& cfg) {
  if (cfg.num_queries < 1) throw ValidationError("num_queries must be >= 1");
  if (cfg.answers_per_query < 1) throw ValidationError("answers_per_query must be >= 1");
  if (!cfg.ground_truth.empty() && cfg.ground_truth.size() != 1 &&
      cfg.ground_truth.size() != static_cast<std::size_t>(cfg.num_queries))
    throw ValidationError("ground_truth must hold one index or one per query");
  for (int g : cfg.ground_truth)
    if (g < 0 || g >= cfg.answers_per_query)
      throw ValidationError("ground_truth index " + std::to_string(g) + " out of range");
  if (cfg.init.kind == InitSpec::Kind::explicit_probs &&
      cfg.init.probs.size() != static_cast<std::size_t>(cfg.answers_per_query))
    throw ValidationError("init_logits: explicit list must have answers_per_query entries");
  if (!(cfg.entropy.mu_correct >= 0.0) || !(cfg.entropy.mu_incorrect >= 0.0))
    throw ValidationError("entropy means must be >= 0");
  if (!(cfg.entropy.sigma >= 0.0)) throw ValidationError("sigma_h must be >= 0");
  if (cfg.rollout_budget < 1) throw ValidationError("candidates must be >= 1");
  if (cfg.train_size < 1 || cfg.train_size > cfg.rollout_budget)
    throw ValidationError("train_size must be in [1, candidates]");
  if (cfg.iterations < 0) throw ValidationError("iterations must be >= 0");
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(cfg.clip_eps >= 0.0)) throw ValidationError("clip_eps must be >= 0");
  if (cfg.inner_epochs < 1) throw ValidationError("inner_epochs must be >= 1");
  validate(cfg.labeling);
}

inline int ground_truth_for(const SimConfig& cfg, int query) {
  if (cfg.ground_truth.empty()) return 0;
  if (cfg.ground_truth.size() == 1) return cfg.ground_truth.front();
  return cfg.ground_truth[static_cast<std::size_t>(query)];
}

inline const std::vector<std::string_view>& sim_config_keys() {
  static const std::vector<std::string_view> keys = {
      "num_queries", "answers_per_query", "ground_truth", "init_logits", "mu_correct",
      "mu_incorrect", "sigma_h",           "candidates",   "train_size",  "iterations",
      "learning_rate", "method",           "tau_pos",      "tau_marg",    "tau_neg",
      "lambda_h",      "clip_eps",         "inner_epochs", "seed"};
  return keys;
}

inline RewardMethod parse_method(std::string_view name) {
  if (name == "scrl") return RewardMethod::scrl;
  if (name == "ttrl") return RewardMethod::ttrl;
  throw ValidationError("method must be \"scrl\" or \"ttrl\", got \"" + std::string(name) + "\"");
}

inline SimConfig sim_config_from(const ConfigDoc& doc) {
  doc.require_known(sim_config_keys());
  SimConfig cfg;
  cfg.num_queries = doc.get<int>("num_queries", cfg.num_queries);
  cfg.answers_per_query = doc.get<int>("answers_per_query", cfg.answers_per_query);
  if (const auto* gt = doc.find("ground_truth")) {
    if (gt->is_array())
      cfg.ground_truth = gt->get<std::vector<int>>();
    else
      cfg.ground_truth = {gt->get<int>()};
  }
  if (doc.has("init_logits")) cfg.init = InitSpec::parse(doc.get<std::string>("init_logits", ""));
  cfg.entropy.mu_correct = doc.get<double>("mu_correct", cfg.entropy.mu_correct);
  cfg.entropy.mu_incorrect = doc.get<double>("mu_incorrect", cfg.entropy.mu_incorrect);
  cfg.entropy.sigma = doc.get<double>("sigma_h", cfg.entropy.sigma);
  cfg.rollout_budget = doc.get<int>("candidates", cfg.rollout_budget);
  cfg.train_size = doc.get<int>("train_size", cfg.train_size);
  cfg.iterations = doc.get<int>("iterations", cfg.iterations);
  cfg.learning_rate = doc.get<double>("learning_rate", cfg.learning_rate);
  if (doc.has("method")) cfg.method = parse_method(doc.get<std::string>("method", "scrl"));
  cfg.labeling.tau_pos = doc.get<double>("tau_pos", cfg.labeling.tau_pos);
  cfg.labeling.tau_marg = doc.get<double>("tau_marg", cfg.labeling.tau_marg);
  cfg.labeling.tau_neg = doc.get<double>("tau_neg", cfg.labeling.tau_neg);
  cfg.labeling.lambda_h = doc.get<double>("lambda_h", cfg.labeling.lambda_h);
  cfg.clip_eps = doc.get<double>("clip_eps", cfg.clip_eps);
  cfg.inner_epochs = doc.get<int>("inner_epochs", cfg.inner_epochs);
  cfg.seed = doc.get<std::uint64_t>("seed", cfg.seed);
  validate(cfg);
  return cfg;
}

// Per-query answer logits.
struct PolicyState {
  std::vector<std::vector<double>> logits;  // [query][answer]
};

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> probs(logits.size());
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - m);
    z += probs[k];
  }
  for (double& p : probs) p /= z;
  return probs;
}

inline int categorical(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;  // rounding leftovers
}

// n rollouts for one query: answers from softmax(logits), trajectory entropy
// from the correctness-conditional normal model clamped at 0.
inline QueryGroup sample_rollouts(std::span<const double> logits, const std::string& query_id,
                                  int n, int ground_truth, const EntropyModel& em, Rng& rng) {
  if (n < 1) throw ValidationError("sample_rollouts: n must be >= 1");
  const std::vector<double> probs = softmax(logits);
  QueryGroup group{query_id, {}};
  group.rollouts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int answer = categorical(probs, rng.next_double());
    const double mu = answer == ground_truth ? em.mu_correct : em.mu_incorrect;
    Rollout r;
    r.query_id = query_id;
    r.rollout_id = "r" + std::to_string(i);
    r.answer = std::to_string(answer);
    r.traj_entropy = std::max(0.0, rng.next_normal(mu, em.sigma));
    r.length = 1;
    group.rollouts.push_back(std::move(r));
  }
  return group;
}

// Clipped surrogate for single-decision trajectories:
//   J = (1/G) sum_i min(rho_i * A_i, clip(rho_i, 1-eps, 1+eps) * A_i),
//   rho_i = softmax(logits)[a_i] / old_probs[a_i].
inline double clipped_surrogate(std::span<const double> logits, std::span<const double> old_probs,
                                std::span<const int> answers, std::span<const double> advantages,
                                double clip_eps) {
  const std::vector<double> probs = softmax(logits);
  double total = 0.0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const int a = answers[i];
    const double rho = probs[a] / old_probs[a];
    const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
    total += std::min(rho * advantages[i], clipped * advantages[i]);
  }
  return total / static_cast<double>(answers.size());
}

// Analytic gradient of clipped_surrogate with respect to the logits. A
// rollout contributes only while its unclipped branch is the active min;
// ties at the clip boundary take the unclipped subgradient.
inline std::vector<double> clipped_surrogate_gradient(std::span<const double> logits,
                                                      std::span<const double> old_probs,
                                                      std::span<const int> answers,
                                                      std::span<const double> advantages,
                                                      double clip_eps) {
  const std::vector<double> probs = softmax(logits);
  std::vector<double> grad(logits.size(), 0.0);
  double coef_total = 0.0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const int a = answers[i];
    const double rho = probs[a] / old_probs[a];
    const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
    if (rho * advantages[i] > clipped * advantages[i]) continue;  // clipped flat region
    const double coef = advantages[i] / old_probs[a] * probs[a];  // d(rho A)/dlogit via softmax
    grad[a] += coef;
    coef_total += coef;
  }
  const double g = static_cast<double>(answers.size());
  for (std::size_t k = 0; k < logits.size(); ++k) grad[k] = (grad[k] - probs[k] * coef_total) / g;
  return grad;
}

// Per-iteration label-quality and convergence statistics. Accuracy ratios
// over an empty set (no labels of that kind emitted) report 1.0: no labels,
// no label errors. positive_label_ratio makes that case visible.
struct IterationRecord {
  int iteration = 0;
  double positive_label_accuracy = 1.0;  // emitted positives equal to ground truth
  double positive_label_ratio = 0.0;     // queries with an emitted positive
  double negative_label_accuracy = 1.0;  // emitted negatives not equal to ground truth
  double mean_negatives_per_query = 0.0;
  double majority_label_accuracy = 0.0;  // plain majority vote on the same samples
  double greedy_accuracy = 0.0;          // argmax(policy) == ground truth
  double mean_reward = 0.0;              // over training subsets
};

struct SimMetrics {
  std::vector<IterationRecord> records;
};

class Simulator {
 public:
  // What happened for one query during the latest step; kept for tests and
  // diagnostics.
  struct QueryStep {
    std::vector<int> candidate_answers;
    std::vector<int> train_answers;
    std::vector<double> rewards;
    std::vector<double> advantages;
    std::optional<int> majority;
    std::optional<int> positive;
    std::vector<int> negatives;
  };

  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    const int q = cfg_.num_queries;
    const int k = cfg_.answers_per_query;
    query_names_.reserve(q);
    for (int i = 0; i < q; ++i) query_names_.push_back("q" + std::to_string(i));
    streams_.reserve(q);
    for (int i = 0; i < q; ++i) streams_.push_back(derive_rng(cfg_.seed, static_cast<std::uint64_t>(i)));
    policy_.logits.assign(q, std::vector<double>(k, 0.0));
    for (int i = 0; i < q; ++i) init_query(i);
  }

  const SimConfig& config() const { return cfg_; }
  const PolicyState& policy() const { return policy_; }
  int steps_taken() const { return step_count_; }
  const std::vector<QueryStep>& last_step() const { return last_step_; }

  // One measurement pass at the current policy, optionally followed by one
  // training update. The returned record reflects the policy *before* the
  // update, so record t always describes the policy after t updates.
  IterationRecord step(bool apply_update) {
    IterationRecord rec;
    rec.iteration = step_count_;

    int greedy_hits = 0;
    int positives = 0, positive_hits = 0;
    int negatives = 0, negative_misses = 0;
    int votes = 0, vote_hits = 0;
    double reward_sum = 0.0;
    std::size_t reward_count = 0;

    last_step_.assign(static_cast<std::size_t>(cfg_.num_queries), QueryStep{});
    for (int q = 0; q < cfg_.num_queries; ++q) {
      const int gt = ground_truth_for(cfg_, q);
      const std::vector<double>& logits = policy_.logits[q];
      if (static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin()) == gt)
        ++greedy_hits;

      QueryGroup group = sample_rollouts(logits, query_names_[q], cfg_.rollout_budget, gt,
                                         cfg_.entropy, streams_[q]);
      const AnswerDistribution dist = build_distribution(group);
      const LabelDecision decision = decide_labels(dist, cfg_.labeling);

      QueryStep& qs = last_step_[q];
      qs.candidate_answers.reserve(group.size());
      for (const Rollout& r : group.rollouts) qs.candidate_answers.push_back(std::stoi(*r.answer));

      const QueryGroup train = cfg_.train_size < cfg_.rollout_budget
                                   ? downsample_with(streams_[q], group, cfg_.train_size)
                                   : std::move(group);
      const std::vector<double> rewards =
          cfg_.method == RewardMethod::scrl
              ? shape_rewards(train, dist, decision, cfg_.labeling)
              : ttrl_rewards(train, dist);
      const std::vector<double> advantages = group_advantages(rewards);

      qs.train_answers.reserve(train.size());
      for (const Rollout& r : train.rollouts) qs.train_answers.push_back(std::stoi(*r.answer));
      qs.rewards = rewards;
      qs.advantages = advantages;
      if (auto vote = majority_vote(dist)) {
        qs.majority = std::stoi(*vote);
        ++votes;
        if (*qs.majority == gt) ++vote_hits;
      }
      if (decision.positive) {
        qs.positive = std::stoi(*decision.positive);
        ++positives;
        if (*qs.positive == gt) ++positive_hits;
      }
      for (const std::string& a : decision.negatives) {
        const int idx = std::stoi(a);
        qs.negatives.push_back(idx);
        ++negatives;
        if (idx == gt) ++negative_misses;
      }
      for (double r : rewards) reward_sum += r;
      reward_count += rewards.size();

      if (apply_update) update_query(q, qs.train_answers, advantages);
    }

    const double nq = static_cast<double>(cfg_.num_queries);
    rec.greedy_accuracy = greedy_hits / nq;
    rec.positive_label_ratio = positives / nq;
    rec.positive_label_accuracy = positives > 0 ? static_cast<double>(positive_hits) / positives : 1.0;
    rec.negative_label_accuracy =
        negatives > 0 ? 1.0 - static_cast<double>(negative_misses) / negatives : 1.0;
    rec.mean_negatives_per_query = negatives / nq;
    rec.majority_label_accuracy = votes > 0 ? static_cast<double>(vote_hits) / votes : 0.0;
    rec.mean_reward = reward_count > 0 ? reward_sum / static_cast<double>(reward_count) : 0.0;

    ++step_count_;
    return rec;
  }

  // T training iterations, T+1 records: record t describes the policy after
  // t updates together with label statistics measured at that policy.
  SimMetrics run() {
    SimMetrics metrics;
    metrics.records.reserve(static_cast<std::size_t>(cfg_.iterations) + 1);
    for (int t = 0; t <= cfg_.iterations; ++t) metrics.records.push_back(step(t < cfg_.iterations));
    return metrics;
  }

 private:
  void init_query(int q) {
    std::vector<double>& logits = policy_.logits[q];
    switch (cfg_.init.kind) {
      case InitSpec::Kind::uniform:
        return;  // all zero
      case InitSpec::Kind::dirichlet: {
        Rng& rng = streams_[q];
        std::vector<double> gammas(logits.size());
        double total = 0.0;
        for (double& g : gammas) {
          g = rng.next_gamma(cfg_.init.alpha);
          total += g;
        }
        for (std::size_t k = 0; k < logits.size(); ++k)
          logits[k] = std::log(std::max(gammas[k] / total, 1e-300));
        return;
      }
      case InitSpec::Kind::explicit_probs: {
        double total = 0.0;
        for (double p : cfg_.init.probs) total += p;
        for (std::size_t k = 0; k < logits.size(); ++k)
          logits[k] = std::log(cfg_.init.probs[k] / total);
        return;
      }
    }
  }

  // E inner epochs of gradient ascent on the clipped surrogate; pi_old stays
  // frozen at the sampling policy for all epochs of one iteration.
  void update_query(int q, const std::vector<int>& answers, const std::vector<double>& advantages) {
    std::vector<double>& logits = policy_.logits[q];
    const std::vector<double> old_probs = softmax(logits);
    for (int e = 0; e < cfg_.inner_epochs; ++e) {
      const std::vector<double> grad =
          clipped_surrogate_gradient(logits, old_probs, answers, advantages, cfg_.clip_eps);
      for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += cfg_.learning_rate * grad[k];
    }
  }

  SimConfig cfg_;
  PolicyState policy_;
  std::vector<Rng> streams_;
  std::vector<std::string> query_names_;
  std::vector<QueryStep> last_step_;
  int step_count_ = 0;
};

inline SimMetrics run_simulation(const SimConfig& cfg) { return Simulator(cfg).run(); }

}  // namespace scrl
