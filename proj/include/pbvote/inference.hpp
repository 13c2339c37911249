#pragma once

#include <map>

#include "pbvote/model.hpp"

namespace pbvote {

// How a greedy walk down a ranking treats the first project that no longer fits.
enum class InferMode { partial, skip };

std::string_view to_string(InferMode mode);
InferMode parse_infer_mode(std::string_view text);

// The voter would have approved their k' highest-ranked projects.
ApprovalBallot infer_approval(const RankingBallot& ranking, int k_prime);

// Same prefix rule, named for vote-pair analysis where k_i comes from the paired approval ballot.
ApprovalBallot truncate_to_voter_k(const RankingBallot& ranking, int voter_k);

// Walks the ranking funding projects in full while they fit.
//   partial: the first project that does not fit receives whatever budget is left, then the walk stops.
//   skip:    projects that do not fit are passed over; the walk continues to lower ranks.
// A zero remainder never produces a zero-amount entry.
KnapsackBallot infer_knapsack(const RankingBallot& ranking, Money budget, const std::map<ProjectId, Money>& costs,
                              InferMode mode);
KnapsackBallot infer_knapsack(const RankingBallot& ranking, const Election& election, InferMode mode);

std::map<ProjectId, Money> project_costs(const Election& election);

}  // namespace pbvote
