#pragma once

// Dynamic reward shaping, the majority-vote baseline reward, group-normalized
// advantages, the amplification diagnostic, and candidate downsampling.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scrl/error.hpp"
#include "scrl/labeling.hpp"
#include "scrl/rng.hpp"

namespace scrl {

enum class RewardMethod { scrl, ttrl };

enum class LabelRole { positive, negative, unlabeled, invalid };

inline std::string_view to_string(LabelRole role) {
  switch (role) {
    case LabelRole::positive: return "positive";
    case LabelRole::negative: return "negative";
    case LabelRole::unlabeled: return "unlabeled";
    case LabelRole::invalid: return "invalid";
  }
  return "unlabeled";
}

inline std::string_view to_string(RewardMethod m) {
  return m == RewardMethod::scrl ? "scrl" : "ttrl";
}

struct RewardedRollout {
  std::string rollout_id;
  double reward = 0.0;
  double advantage = 0.0;
  LabelRole role = LabelRole::unlabeled;
};

struct RewardedGroup {
  std::string query_id;
  std::vector<RewardedRollout> rollouts;
};

// Advantage every positive rollout receives when rewards are binary with
// positive fraction f: sqrt((1-f)/f). Grows without bound as f shrinks,
// which is exactly how a weak majority gets over-reinforced.
inline double amplification_factor(double f) {
  if (!(f > 0.0 && f < 1.0))
    throw ValidationError("positive fraction must be in (0,1), got " + std::to_string(f));
  return std::sqrt((1.0 - f) / f);
}

struct AmplificationReport {
  double positive_fraction = 0.0;
  double a_plus = 0.0;
};

inline AmplificationReport amplification_report(double f) {
  return AmplificationReport{f, amplification_factor(f)};
}

inline constexpr double kAdvantageEps = 1e-8;

// (R - mean) / stddev over the group, population stddev. Degenerate groups
// (stddev below eps) yield all-zero advantages: no update signal.
inline std::vector<double> group_advantages(std::span<const double> rewards,
                                            double eps = kAdvantageEps) {
  if (rewards.empty()) throw ValidationError("group_advantages: empty group");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double sigma = std::sqrt(var);
  std::vector<double> adv(rewards.size(), 0.0);
  if (sigma < eps) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sigma;
  return adv;
}

// Reward for rollouts whose answer could not be extracted. `penalize` treats
// them as verifiably non-positive (-tau_neg, the worst-case negative-label
// reward); `zero` leaves them without signal.
enum class InvalidRewardPolicy { penalize, zero };

inline LabelRole classify_rollout(const Rollout& r, const LabelDecision& decision) {
  if (!r.answer) return LabelRole::invalid;
  if (decision.positive && *decision.positive == *r.answer) return LabelRole::positive;
  if (decision.negatives.count(*r.answer)) return LabelRole::negative;
  return LabelRole::unlabeled;
}

// Dynamic reward:
//   R_i = p(a_i) * [a_i is the positive label]
//       + (p(a_i) - tau_neg) * [a_i is a negative label]
//       - lambda_h * (mean_entropy(a_i) - query_mean_entropy)
// Proportions and entropy statistics come from `dist`, which must be built
// from the full candidate set even when `group` is a downsampled training
// subset of it. The entropy term is 0 for rollouts whose answer carries no
// entropy evidence.
inline std::vector<double> shape_rewards(const QueryGroup& group, const AnswerDistribution& dist,
                                         const LabelDecision& decision, const LabelingConfig& cfg,
                                         InvalidRewardPolicy invalid_policy = InvalidRewardPolicy::penalize) {
  std::vector<double> rewards;
  rewards.reserve(group.size());
  for (const Rollout& r : group.rollouts) {
    if (!r.answer) {
      rewards.push_back(invalid_policy == InvalidRewardPolicy::penalize ? -cfg.tau_neg : 0.0);
      continue;
    }
    const AnswerEntry* entry = dist.find(*r.answer);
    if (entry == nullptr)
      throw ValidationError("rollout " + r.rollout_id + ": answer not present in the candidate distribution");
    double reward = 0.0;
    if (decision.positive && *decision.positive == *r.answer) reward += entry->proportion;
    if (decision.negatives.count(*r.answer)) reward += entry->proportion - cfg.tau_neg;
    if (entry->mean_entropy && dist.query_mean_entropy)
      reward -= cfg.lambda_h * (*entry->mean_entropy - *dist.query_mean_entropy);
    rewards.push_back(reward);
  }
  return rewards;
}

// Majority-voting baseline: 1 for rollouts matching the vote, else 0.
inline std::vector<double> ttrl_rewards(const QueryGroup& group, const AnswerDistribution& dist) {
  const std::optional<std::string> vote = majority_vote(dist);
  std::vector<double> rewards;
  rewards.reserve(group.size());
  for (const Rollout& r : group.rollouts)
    rewards.push_back(vote && r.answer && *r.answer == *vote ? 1.0 : 0.0);
  return rewards;
}

// Uniform sample of m rollouts without replacement, original order kept.
// Selection sampling over the provided stream: one uniform per element.
inline QueryGroup downsample_with(Rng& rng, const QueryGroup& group, std::size_t m) {
  if (m > group.size())
    throw ValidationError("downsample: requested " + std::to_string(m) + " of " +
                          std::to_string(group.size()) + " rollouts");
  QueryGroup out{group.query_id, {}};
  out.rollouts.reserve(m);
  std::size_t remaining = group.size();
  std::size_t needed = m;
  for (const Rollout& r : group.rollouts) {
    if (needed == 0) break;
    if (rng.next_double() * static_cast<double>(remaining) < static_cast<double>(needed)) {
      out.rollouts.push_back(r);
      --needed;
    }
    --remaining;
  }
  return out;
}

// Deterministic per (seed, query_id): the substream is derived from both, so
// results do not depend on the order queries are processed in.
inline QueryGroup downsample(const QueryGroup& group, std::size_t m, std::uint64_t seed) {
  Rng rng = derive_rng(seed, group.query_id);
  return downsample_with(rng, group, m);
}

}  // namespace scrl
