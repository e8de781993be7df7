#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "scrl/entropy.hpp"
#include "scrl/error.hpp"

namespace scrl {

// One sampled response, reduced to its canonical answer plus entropy
// evidence. `answer` is absent when no answer could be extracted; absence can
// never collide with a real answer string. Unknown record fields ride along
// in `extras` so rewritten logs keep them.
struct Rollout {
  std::string query_id;
  std::string rollout_id;
  std::optional<std::string> answer;
  std::optional<std::vector<double>> token_entropies;  // nats, one per token
  std::optional<double> traj_entropy;                  // nats, mean over tokens
  std::int64_t length = 1;                             // token count
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();

  bool has_entropy() const { return traj_entropy.has_value(); }

  bool operator==(const Rollout&) const = default;
};

// Checks the record invariants and fills traj_entropy from token_entropies
// when only the latter is present.
inline void finalize_rollout(Rollout& r) {
  if (r.query_id.empty()) throw ValidationError("rollout: empty query_id");
  if (r.rollout_id.empty()) throw ValidationError("rollout: empty rollout_id");
  const std::string tag = "rollout " + r.query_id + "/" + r.rollout_id;
  if (r.length <= 0) throw ValidationError(tag + ": length must be positive");
  if (r.traj_entropy && !(*r.traj_entropy >= 0.0))
    throw ValidationError(tag + ": negative traj_entropy");
  if (r.token_entropies) {
    if (static_cast<std::int64_t>(r.token_entropies->size()) != r.length)
      throw ValidationError(tag + ": token_entropies size " +
                            std::to_string(r.token_entropies->size()) +
                            " does not match length " + std::to_string(r.length));
    const double mean = trajectory_entropy(*r.token_entropies);  // rejects negatives
    if (r.traj_entropy) {
      if (std::abs(*r.traj_entropy - mean) > 1e-9)
        throw ValidationError(tag + ": traj_entropy disagrees with the token mean");
    } else {
      r.traj_entropy = mean;
    }
  }
}

// All rollouts sampled for one query, in sampling order.
struct QueryGroup {
  std::string query_id;
  std::vector<Rollout> rollouts;

  std::size_t size() const { return rollouts.size(); }
};

inline void validate_group(const QueryGroup& group) {
  if (group.rollouts.empty()) throw ValidationError("query group " + group.query_id + " is empty");
  std::unordered_set<std::string> seen;
  for (const Rollout& r : group.rollouts) {
    if (r.query_id != group.query_id)
      throw ValidationError("rollout " + r.rollout_id + " has query_id " + r.query_id +
                            ", expected " + group.query_id);
    if (!seen.insert(r.rollout_id).second)
      throw ValidationError("duplicate rollout_id " + r.rollout_id + " in query " + group.query_id);
  }
}

// One group per distinct query_id, ordered by first appearance; rollouts keep
// input order even when queries interleave.
inline std::vector<QueryGroup> group_by_query(std::span<const Rollout> records) {
  std::vector<QueryGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const Rollout& r : records) {
    auto [it, inserted] = index.emplace(r.query_id, groups.size());
    if (inserted) groups.push_back(QueryGroup{r.query_id, {}});
    groups[it->second].rollouts.push_back(r);
  }
  for (const QueryGroup& g : groups) validate_group(g);
  return groups;
}

}  // namespace scrl
