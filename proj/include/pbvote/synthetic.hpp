#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pbvote/inference.hpp"
#include "pbvote/model.hpp"

namespace pbvote {

// How each voter's secondary ballot is derived from their (possibly perturbed) ranking.
enum class SecondaryKind { approval, knapsack_partial, knapsack_skip };

std::string_view to_string(SecondaryKind kind);
SecondaryKind parse_secondary_kind(std::string_view text);

struct SyntheticModel {
  int num_elections = 1;
  int num_voters = 100;
  int num_projects = 10;
  Money budget = Money::dollars(1000);
  Money min_cost = Money::dollars(50);
  Money max_cost = Money::dollars(500);
  Money cost_unit = Money::dollars(10);  // costs, budget and knapsack cost step are multiples of this
  std::vector<Money> costs;              // explicit project costs; overrides the random draw when non-empty
  int ranking_k = 5;
  double taste_spread = 1.0;  // sd of voter-specific utility around the shared project quality
  double ballot_noise = 0.0;  // per-position probability of a swap or substitution before deriving the secondary
  SecondaryKind secondary = SecondaryKind::knapsack_partial;
  int approval_k = 5;  // K of an approval secondary
  RemainderPolicy policy = RemainderPolicy::skip;
};

// Parses "key = value" lines (blank lines and '#' comments ignored) on top of the defaults.
// Money values are whole dollars; `costs` is a comma-separated dollar list.
SyntheticModel parse_synthetic_model(std::string_view text);
std::string format_synthetic_model(const SyntheticModel& model);

struct SyntheticElection {
  Election election;
  std::vector<Voter> voters;
  std::vector<BallotEnvelope> primary;    // ranking ballots
  std::vector<BallotEnvelope> secondary;  // derived from the primaries through the noise process
};

struct SyntheticPopulation {
  std::uint64_t seed = 0;
  SyntheticModel model;
  std::vector<SyntheticElection> elections;
};

// Deterministic for a given (seed, model). Throws std::invalid_argument on degenerate parameters.
SyntheticPopulation synthetic_population(std::uint64_t seed, const SyntheticModel& model);

}  // namespace pbvote
