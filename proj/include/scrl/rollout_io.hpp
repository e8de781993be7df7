#pragma once

// Rollout JSONL schema, one UTF-8 record per line:
//   {"query_id": str, "rollout_id": str, "answer": str|null,
//    "token_entropies": [float]|null, "traj_entropy": float|null, "length": int}
// Unknown fields are preserved but ignored. Empty lines are skipped.

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scrl/error.hpp"
#include "scrl/rollout.hpp"

namespace scrl {

namespace detail {

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace detail

inline Rollout parse_rollout_record(std::string_view line, std::size_t line_no = 0) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw ParseError("rollout record must be a JSON object", line_no);

  Rollout r;
  try {
    for (auto& [key, value] : j.items()) {
      if (key == "query_id") {
        r.query_id = value.get<std::string>();
      } else if (key == "rollout_id") {
        r.rollout_id = value.get<std::string>();
      } else if (key == "answer") {
        if (!value.is_null()) r.answer = value.get<std::string>();
      } else if (key == "token_entropies") {
        if (!value.is_null()) r.token_entropies = value.get<std::vector<double>>();
      } else if (key == "traj_entropy") {
        if (!value.is_null()) r.traj_entropy = value.get<double>();
      } else if (key == "length") {
        r.length = value.get<std::int64_t>();
      } else {
        r.extras[key] = value;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad field type: ") + e.what(), line_no);
  }
  if (!j.contains("query_id") || !j.contains("rollout_id") || !j.contains("length"))
    throw ParseError("rollout record needs query_id, rollout_id and length", line_no);
  finalize_rollout(r);
  return r;
}

inline std::string serialize_rollout(const Rollout& r) {
  nlohmann::ordered_json j;
  j["query_id"] = r.query_id;
  j["rollout_id"] = r.rollout_id;
  j["answer"] = r.answer ? nlohmann::ordered_json(*r.answer) : nullptr;
  j["token_entropies"] = r.token_entropies ? nlohmann::ordered_json(*r.token_entropies) : nullptr;
  j["traj_entropy"] = r.traj_entropy ? nlohmann::ordered_json(*r.traj_entropy) : nullptr;
  j["length"] = r.length;
  for (auto& [key, value] : r.extras.items()) j[key] = value;
  return j.dump();
}

// Streaming JSONL reader; keeps the current line number for diagnostics.
class RolloutReader {
 public:
  explicit RolloutReader(std::istream& in) : in_(in) {}

  std::optional<Rollout> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (detail::is_blank(line)) continue;
      try {
        return parse_rollout_record(line, line_);
      } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line_) + ": " + e.what());
      }
    }
    if (in_.bad()) throw IoError("read failure at line " + std::to_string(line_));
    return std::nullopt;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Streams one query group at a time, so scoring holds a single group in
// memory. Requires all records of a query to be contiguous; a query_id that
// reappears after its group ended is reported as a validation error.
class GroupReader {
 public:
  explicit GroupReader(std::istream& in) : reader_(in) {}

  std::optional<QueryGroup> next() {
    if (!pending_) pending_ = reader_.next();
    if (!pending_) return std::nullopt;

    QueryGroup group{pending_->query_id, {}};
    if (!finished_.insert(group.query_id).second)
      throw ValidationError("line " + std::to_string(reader_.line()) +
                            ": input is not grouped by query_id (query " + group.query_id +
                            " reappears)");
    while (pending_ && pending_->query_id == group.query_id) {
      group.rollouts.push_back(std::move(*pending_));
      pending_ = reader_.next();
    }
    validate_group(group);
    return group;
  }

 private:
  RolloutReader reader_;
  std::optional<Rollout> pending_;
  std::unordered_set<std::string> finished_;
};

}  // namespace scrl
