#include "pbvote/results.hpp"

#include <algorithm>

namespace pbvote {

namespace {

template <class T>
std::vector<T> ballots_of(const std::vector<Ballot>& ballots, const std::string& method, MethodKind expected) {
  std::vector<T> out;
  out.reserve(ballots.size());
  for (const auto& b : ballots) {
    const auto* typed = std::get_if<T>(&b);
    if (!typed)
      throw MethodIncompatible("method " + method + " needs " + std::string(to_string(expected)) + " ballots, got " +
                               std::string(to_string(kind_of(b))));
    out.push_back(*typed);
  }
  return out;
}

}  // namespace

std::vector<std::string> results_methods(MethodKind kind) {
  switch (kind) {
    case MethodKind::approval: return {"approval"};
    case MethodKind::token: return {"token"};
    case MethodKind::knapsack: return {"knapsack", "per_dollar"};
    case MethodKind::ranking: {
      std::vector<std::string> out;
      for (const auto& m : RankingAggregation::standard_set()) out.push_back(m.label());
      out.insert(out.begin() + 8, "mk_k");
      return out;
    }
  }
  return {};
}

std::string default_results_method(const Election& election) {
  switch (election.method.kind) {
    case MethodKind::approval: return "approval";
    case MethodKind::token: return "token";
    case MethodKind::knapsack: return election.method.cost_step ? "per_dollar" : "knapsack";
    case MethodKind::ranking: return "full_k";
  }
  return "approval";
}

ElectionResults compute_results(const Election& election, const std::vector<Ballot>& ballots,
                                const std::optional<std::string>& method, const std::optional<RemainderPolicy>& policy) {
  ElectionResults out;
  out.method = method.value_or(default_results_method(election));
  out.policy = policy.value_or(election.remainder_policy);
  out.ballots_counted = ballots.size();
  const std::string& m = out.method;

  const bool fixed_name = m == "approval" || m == "token" || m == "knapsack" || m == "per_dollar";
  const auto accepted = results_methods(election.method.kind);
  if (fixed_name ? std::find(accepted.begin(), accepted.end(), m) == accepted.end()
                 : election.method.kind != MethodKind::ranking)
    throw MethodIncompatible("method " + m + " cannot aggregate " + std::string(to_string(election.method.kind)) +
                             " ballots");

  if (m == "approval") {
    out.scores = score_approval(ballots_of<ApprovalBallot>(ballots, m, MethodKind::approval), election);
  } else if (m == "token") {
    out.scores = score_token(ballots_of<TokenBallot>(ballots, m, MethodKind::token), election);
  } else if (m == "knapsack") {
    out.scores = score_knapsack_counts(ballots_of<KnapsackBallot>(ballots, m, MethodKind::knapsack), election);
  } else if (m == "per_dollar") {
    if (out.policy != RemainderPolicy::partial) {
      if (policy) throw MethodIncompatible("per_dollar aggregation only supports the partial policy");
      out.policy = RemainderPolicy::partial;
    }
    const auto knapsacks = ballots_of<KnapsackBallot>(ballots, m, MethodKind::knapsack);
    out.scores = score_knapsack_counts(knapsacks, election);
    out.scores.method_label = m;
    out.allocation = allocate_per_dollar(score_knapsack_per_dollar(knapsacks, election), election);
    return out;
  } else {
    RankingAggregation agg;
    try {
      agg = RankingAggregation::parse(m);
    } catch (const std::invalid_argument&) {
      throw MethodIncompatible("unknown aggregation method '" + m + "'");
    }
    out.scores = score_ranking_as(agg, ballots_of<RankingBallot>(ballots, m, MethodKind::ranking), election);
  }
  out.scores.method_label = m;
  out.allocation = rank_and_allocate(out.scores, election, out.policy);
  return out;
}

}  // namespace pbvote
