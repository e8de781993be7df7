#pragma once

// SimMetrics serialization: JSONL (one record per iteration) and a CSV column
// table for plotting. Doubles are printed with shortest-round-trip formatting
// so equal runs produce byte-identical files.

#include <charconv>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "scrl/sim.hpp"

namespace scrl {

inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline void write_metrics_jsonl(std::ostream& out, const SimMetrics& metrics) {
  for (const IterationRecord& r : metrics.records) {
    nlohmann::ordered_json j;
    j["iteration"] = r.iteration;
    j["greedy_accuracy"] = r.greedy_accuracy;
    j["mean_reward"] = r.mean_reward;
    j["positive_label_accuracy"] = r.positive_label_accuracy;
    j["positive_label_ratio"] = r.positive_label_ratio;
    j["negative_label_accuracy"] = r.negative_label_accuracy;
    j["mean_negatives_per_query"] = r.mean_negatives_per_query;
    j["majority_label_accuracy"] = r.majority_label_accuracy;
    out << j.dump() << '\n';
  }
}

inline void write_metrics_csv(std::ostream& out, const SimMetrics& metrics) {
  out << "iteration,greedy_accuracy,mean_reward,positive_label_accuracy,positive_label_ratio,"
         "negative_label_accuracy,mean_negatives_per_query,majority_label_accuracy\n";
  for (const IterationRecord& r : metrics.records) {
    out << r.iteration << ',' << format_double(r.greedy_accuracy) << ','
        << format_double(r.mean_reward) << ',' << format_double(r.positive_label_accuracy) << ','
        << format_double(r.positive_label_ratio) << ','
        << format_double(r.negative_label_accuracy) << ','
        << format_double(r.mean_negatives_per_query) << ','
        << format_double(r.majority_label_accuracy) << '\n';
  }
}

}  // namespace scrl
