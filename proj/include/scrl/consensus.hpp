#pragma once

// Per-query answer distributions, majority voting, and the selective positive
// pseudo-labeling rule with abstention.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scrl/error.hpp"
#include "scrl/rollout.hpp"

namespace scrl {

// Labeling thresholds and the uncertainty penalty weight.
struct LabelingConfig {
  double tau_pos = 0.375;   // minimum support for a positive label
  double tau_marg = 0.125;  // required lead over the runner-up
  double tau_neg = 0.125;   // support below which an answer is a negative candidate
  double lambda_h = 0.1;    // weight of the uncertainty term in shaped rewards
};

inline void validate(const LabelingConfig& cfg) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(cfg.tau_pos)) throw ValidationError("tau_pos must be in [0,1]");
  if (!in_unit(cfg.tau_marg)) throw ValidationError("tau_marg must be in [0,1]");
  if (!in_unit(cfg.tau_neg)) throw ValidationError("tau_neg must be in [0,1]");
  if (!(cfg.lambda_h >= 0.0)) throw ValidationError("lambda_h must be >= 0");
}

struct AnswerEntry {
  std::string answer;
  int count = 0;
  double proportion = 0.0;             // count / n_valid
  std::optional<double> mean_entropy;  // mean traj entropy of this answer's evidenced rollouts
};

// Histogram over the extractable answers of one query group. Entries are
// sorted by (count descending, answer ascending) so the mode and runner-up
// are deterministic. Rollouts without an answer are excluded from the counts
// but still contribute to query_mean_entropy: a response with no extractable
// answer is real evidence of uncertainty.
struct AnswerDistribution {
  std::string query_id;
  std::vector<AnswerEntry> entries;
  int n_valid = 0;
  int n_invalid = 0;
  std::optional<double> query_mean_entropy;  // mean over every evidenced rollout

  const AnswerEntry* find(std::string_view answer) const {
    for (const AnswerEntry& e : entries)
      if (e.answer == answer) return &e;
    return nullptr;
  }

  double top_proportion() const { return entries.empty() ? 0.0 : entries.front().proportion; }

  // Lead of the mode over the runner-up; the runner-up proportion is 0 when
  // there is a single entry.
  double margin() const {
    if (entries.empty()) return 0.0;
    const double second = entries.size() > 1 ? entries[1].proportion : 0.0;
    return entries.front().proportion - second;
  }
};

inline AnswerDistribution build_distribution(const QueryGroup& group) {
  validate_group(group);

  struct Accum {
    std::string answer;
    int count = 0;
    double entropy_sum = 0.0;
    int entropy_count = 0;
  };
  std::vector<Accum> accums;  // first-seen order; sums accumulate in group order
  double query_sum = 0.0;
  int query_count = 0;

  AnswerDistribution dist;
  dist.query_id = group.query_id;
  for (const Rollout& r : group.rollouts) {
    if (r.traj_entropy) {
      query_sum += *r.traj_entropy;
      ++query_count;
    }
    if (!r.answer) {
      ++dist.n_invalid;
      continue;
    }
    ++dist.n_valid;
    auto it = std::find_if(accums.begin(), accums.end(),
                           [&](const Accum& a) { return a.answer == *r.answer; });
    if (it == accums.end()) {
      accums.push_back(Accum{*r.answer});
      it = accums.end() - 1;
    }
    ++it->count;
    if (r.traj_entropy) {
      it->entropy_sum += *r.traj_entropy;
      ++it->entropy_count;
    }
  }

  for (const Accum& a : accums) {
    AnswerEntry e;
    e.answer = a.answer;
    e.count = a.count;
    e.proportion = static_cast<double>(a.count) / static_cast<double>(dist.n_valid);
    if (a.entropy_count > 0) e.mean_entropy = a.entropy_sum / a.entropy_count;
    dist.entries.push_back(std::move(e));
  }
  std::sort(dist.entries.begin(), dist.entries.end(), [](const AnswerEntry& a, const AnswerEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.answer < b.answer;
  });
  if (query_count > 0) dist.query_mean_entropy = query_sum / query_count;
  return dist;
}

// Baseline pseudo-label: the most frequent answer, count ties broken by
// ascending answer string. Absent when no rollout produced an answer.
inline std::optional<std::string> majority_vote(const AnswerDistribution& dist) {
  if (dist.entries.empty()) return std::nullopt;
  return dist.entries.front().answer;
}

// Selective positive labeling: emit the mode only when its support reaches
// tau_pos and it leads the runner-up by strictly more than tau_marg;
// otherwise abstain. A tied top can never be emitted (margin 0 fails the
// strict inequality even at tau_marg = 0).
inline std::optional<std::string> select_positive(const AnswerDistribution& dist,
                                                  const LabelingConfig& cfg) {
  if (dist.entries.empty()) return std::nullopt;
  if (dist.top_proportion() >= cfg.tau_pos && dist.margin() > cfg.tau_marg)
    return dist.entries.front().answer;
  return std::nullopt;
}

}  // namespace scrl
