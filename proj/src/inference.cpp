#include "pbvote/inference.hpp"

#include <algorithm>

namespace pbvote {

std::string_view to_string(InferMode mode) { return mode == InferMode::partial ? "partial" : "skip"; }

InferMode parse_infer_mode(std::string_view text) {
  if (text == "partial") return InferMode::partial;
  if (text == "skip") return InferMode::skip;
  throw std::invalid_argument("unknown inference mode: '" + std::string(text) + "'");
}

ApprovalBallot infer_approval(const RankingBallot& ranking, int k_prime) {
  if (k_prime < 1) throw std::invalid_argument("k' must be at least 1, got " + std::to_string(k_prime));
  const auto n = std::min(ranking.ranked.size(), static_cast<std::size_t>(k_prime));
  return ApprovalBallot{{ranking.ranked.begin(), ranking.ranked.begin() + static_cast<std::ptrdiff_t>(n)}};
}

ApprovalBallot truncate_to_voter_k(const RankingBallot& ranking, int voter_k) { return infer_approval(ranking, voter_k); }

KnapsackBallot infer_knapsack(const RankingBallot& ranking, Money budget, const std::map<ProjectId, Money>& costs,
                              InferMode mode) {
  if (budget.is_zero()) throw std::invalid_argument("budget must be positive");
  KnapsackBallot out;
  Money remaining = budget;
  for (const auto& id : ranking.ranked) {
    const auto it = costs.find(id);
    if (it == costs.end()) throw std::out_of_range("ranking references unknown project " + id);
    const Money cost = it->second;
    if (cost <= remaining) {
      out.allocations[id] = cost;
      remaining -= cost;
      continue;
    }
    if (mode == InferMode::partial) {
      if (!remaining.is_zero()) out.allocations[id] = remaining;
      break;
    }
  }
  return out;
}

KnapsackBallot infer_knapsack(const RankingBallot& ranking, const Election& election, InferMode mode) {
  return infer_knapsack(ranking, election.budget, project_costs(election), mode);
}

std::map<ProjectId, Money> project_costs(const Election& election) {
  std::map<ProjectId, Money> costs;
  for (const auto& p : election.projects) costs.emplace(p.id, p.cost);
  return costs;
}

}  // namespace pbvote
