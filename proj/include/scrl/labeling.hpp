#pragma once

// Entropy-gated negative pseudo-labeling and the combined label decision.

#include <optional>
#include <set>
#include <string>

#include "scrl/consensus.hpp"

namespace scrl {

// Positive label plus negative set for one query, with the diagnostics that
// drove the decision.
struct LabelDecision {
  std::optional<std::string> positive;
  std::set<std::string> negatives;
  double top_proportion = 0.0;
  double margin = 0.0;
  bool abstained = true;  // <=> !positive
};

// Negative pseudo-labels: answers whose support is strictly below tau_neg and
// whose answer-level mean entropy is at or above the query mean. The gate
// needs entropy evidence; with none at all the set stays empty instead of
// degrading to frequency-only pruning, which would penalize rare-but-valid
// answers. An answer that would also be emitted as the positive label is
// removed, so contradictory labels cannot arise under nonstandard threshold
// configurations.
inline std::set<std::string> negative_set(const AnswerDistribution& dist,
                                          const LabelingConfig& cfg) {
  std::set<std::string> negatives;
  if (!dist.query_mean_entropy) return negatives;
  for (const AnswerEntry& e : dist.entries) {
    if (!e.mean_entropy) continue;  // no evidence for this answer, gate not evaluable
    if (e.proportion < cfg.tau_neg && *e.mean_entropy >= *dist.query_mean_entropy)
      negatives.insert(e.answer);
  }
  if (auto positive = select_positive(dist, cfg)) negatives.erase(*positive);
  return negatives;
}

inline LabelDecision decide_labels(const AnswerDistribution& dist, const LabelingConfig& cfg) {
  LabelDecision d;
  d.positive = select_positive(dist, cfg);
  d.negatives = negative_set(dist, cfg);
  d.top_proportion = dist.top_proportion();
  d.margin = dist.margin();
  d.abstained = !d.positive.has_value();
  return d;
}

}  // namespace scrl
