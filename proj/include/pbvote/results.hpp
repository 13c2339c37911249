#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbvote/aggregation.hpp"
#include "pbvote/model.hpp"

namespace pbvote {

// The requested aggregation method cannot be applied to the election's ballots.
class MethodIncompatible : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct ElectionResults {
  std::string method;
  RemainderPolicy policy = RemainderPolicy::skip;
  std::size_t ballots_counted = 0;
  ScoreVector scores;
  AllocationResult allocation;
};

// Method names accepted for ballots of `kind`:
//   approval: approval          token: token
//   knapsack: knapsack (one point per supporter), per_dollar
//   ranking:  app1..appM, full_v, full_k, mk, mk_k, k1_v, k1_k, kn_p, kn_s
std::vector<std::string> results_methods(MethodKind kind);

// approval, token, full_k for rankings; per_dollar for knapsack elections with a cost step, knapsack otherwise.
std::string default_results_method(const Election& election);

// Aggregates primary ballots. The policy defaults to the election's remainder policy; per_dollar
// always splits the budget unit by unit and only accepts the partial policy.
ElectionResults compute_results(const Election& election, const std::vector<Ballot>& ballots,
                                const std::optional<std::string>& method = std::nullopt,
                                const std::optional<RemainderPolicy>& policy = std::nullopt);

}  // namespace pbvote
