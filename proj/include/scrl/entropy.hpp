#pragma once

// Shannon entropy over next-token distributions and its trajectory-level
// aggregate. All entropies are in nats.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "scrl/error.hpp"

namespace scrl {

namespace detail {

// Kahan compensated sum. Keeps the uniform-distribution identity
// token_entropy(1/V, ..., 1/V) == ln V accurate to well under 1e-12 for
// vocabulary sizes up to the low thousands.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace detail

// -sum p ln p with the convention 0 ln 0 = 0. Input must be a probability
// vector: every entry in [0,1], total within 1e-9 of 1.
inline double token_entropy(std::span<const double> probabilities) {
  if (probabilities.empty()) throw ValidationError("token_entropy: empty distribution");
  detail::KahanSum total;
  detail::KahanSum entropy;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0))  // also rejects NaN
      throw ValidationError("token_entropy: probability out of [0,1]: " + std::to_string(p));
    total.add(p);
    if (p > 0.0) entropy.add(-p * std::log(p));
  }
  if (std::abs(total.value() - 1.0) > 1e-9)
    throw ValidationError("token_entropy: probabilities sum to " + std::to_string(total.value()) +
                          ", expected 1");
  return entropy.value();
}

// Arithmetic mean of per-token entropies.
inline double trajectory_entropy(std::span<const double> token_entropies) {
  if (token_entropies.empty()) throw ValidationError("trajectory_entropy: empty sequence");
  double sum = 0.0;
  for (double h : token_entropies) {
    if (!(h >= 0.0))
      throw ValidationError("trajectory_entropy: negative entropy " + std::to_string(h));
    sum += h;
  }
  return sum / static_cast<double>(token_entropies.size());
}

}  // namespace scrl
