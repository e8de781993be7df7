#pragma once

// End-to-end per-query scoring: distribution -> labels -> optional
// downsampling -> rewards -> advantages. Shared by the CLI and the simulator
// so both exercise the same code path.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scrl/reward.hpp"

namespace scrl {

struct ScoreOptions {
  LabelingConfig labeling{};
  RewardMethod method = RewardMethod::scrl;
  std::optional<std::size_t> train_size;  // downsample target; absent = keep all
  std::uint64_t seed = 0;
  InvalidRewardPolicy invalid_policy = InvalidRewardPolicy::penalize;
  double advantage_eps = kAdvantageEps;
};

struct ScoredGroup {
  std::string query_id;
  AnswerDistribution distribution;  // over the full candidate set
  LabelDecision decision;
  std::vector<RewardedRollout> records;  // training subset, input order
};

// `candidates` is the full candidate set for the query; label statistics are
// computed on all of it, rewards and advantages on the (possibly downsampled)
// training subset.
inline ScoredGroup score_group(const QueryGroup& candidates, const ScoreOptions& opt) {
  validate(opt.labeling);
  ScoredGroup out;
  out.query_id = candidates.query_id;
  out.distribution = build_distribution(candidates);
  out.decision = decide_labels(out.distribution, opt.labeling);

  const QueryGroup* train = &candidates;
  QueryGroup sampled;
  if (opt.train_size && *opt.train_size < candidates.size()) {
    sampled = downsample(candidates, *opt.train_size, opt.seed);
    train = &sampled;
  }

  const std::vector<double> rewards =
      opt.method == RewardMethod::scrl
          ? shape_rewards(*train, out.distribution, out.decision, opt.labeling, opt.invalid_policy)
          : ttrl_rewards(*train, out.distribution);
  const std::vector<double> advantages = group_advantages(rewards, opt.advantage_eps);

  out.records.reserve(train->size());
  for (std::size_t i = 0; i < train->size(); ++i) {
    const Rollout& r = train->rollouts[i];
    out.records.push_back(
        RewardedRollout{r.rollout_id, rewards[i], advantages[i], classify_rollout(r, out.decision)});
  }
  return out;
}

// Reward JSONL schema, one record per training rollout:
//   {"query_id": str, "rollout_id": str, "reward": float, "advantage": float,
//    "label_role": "positive"|"negative"|"unlabeled"|"invalid",
//    "positive_label": str|null, "negative_labels": [str],
//    "top_p": float, "margin": float}
inline void write_reward_records(std::ostream& out, const ScoredGroup& scored) {
  nlohmann::ordered_json negatives = nlohmann::ordered_json::array();
  for (const std::string& a : scored.decision.negatives) negatives.push_back(a);
  for (const RewardedRollout& r : scored.records) {
    nlohmann::ordered_json j;
    j["query_id"] = scored.query_id;
    j["rollout_id"] = r.rollout_id;
    j["reward"] = r.reward;
    j["advantage"] = r.advantage;
    j["label_role"] = to_string(r.role);
    j["positive_label"] =
        scored.decision.positive ? nlohmann::ordered_json(*scored.decision.positive) : nullptr;
    j["negative_labels"] = negatives;
    j["top_p"] = scored.decision.top_proportion;
    j["margin"] = scored.decision.margin;
    out << j.dump() << '\n';
  }
}

}  // namespace scrl
