#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbvote/inference.hpp"
#include "pbvote/model.hpp"

namespace pbvote {

// Per-project scores. Every score produced here is a multiple of 1/2, so scores are
// held exactly as integer half-points.
struct ScoreVector {
  std::string method_label;
  std::map<ProjectId, std::int64_t> half_points;

  [[nodiscard]] double score(const ProjectId& project) const;
  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

enum class BordaFamily { full, mk, k1 };
enum class KSource { voter, election };

struct BordaVariant {
  BordaFamily family = BordaFamily::full;
  KSource k_source = KSource::voter;

  [[nodiscard]] std::string label() const;  // full_v, full_k, mk, mk_k, k1_v, k1_k
  friend bool operator==(const BordaVariant&, const BordaVariant&) = default;
};

ScoreVector score_approval(const std::vector<ApprovalBallot>& ballots, const Election& election);

// Scores with the election-level K come from `election_k` when given, otherwise from the
// election's ranking method (primary first, then secondary).
ScoreVector score_borda(const std::vector<RankingBallot>& rankings, BordaVariant variant, const Election& election,
                        std::optional<int> election_k = std::nullopt);

ScoreVector score_token(const std::vector<TokenBallot>& ballots, const Election& election);

// Indivisible regime: one point per voter allocating anything to the project.
ScoreVector score_knapsack_counts(const std::vector<KnapsackBallot>& ballots, const Election& election);

// K of the election's ranking method; throws ConfigError when none is configured.
int election_ranking_k(const Election& election);

// Units (cents) in (previous upto, upto] are approved by `count` voters.
struct DollarStep {
  Money upto;
  std::int64_t count = 0;
  friend bool operator==(const DollarStep&, const DollarStep&) = default;
};

// Non-increasing step function over a project's units 1..cost. Units past the last step score 0.
struct StepFunction {
  ProjectId project;
  Money cost;
  std::vector<DollarStep> steps;

  [[nodiscard]] std::int64_t value_at(std::int64_t unit) const;
  friend bool operator==(const StepFunction&, const StepFunction&) = default;
};

// One step function per project, in election project order.
std::vector<StepFunction> score_knapsack_per_dollar(const std::vector<KnapsackBallot>& ballots,
                                                    const Election& election);

// Strict ordering deciding which of two equally scored projects goes first.
using TieBreak = std::function<bool(const Project&, const Project&)>;
TieBreak tie_break_by_ordering();

struct AllocationResult {
  std::map<ProjectId, Money> funded;  // positive amounts only
  std::vector<ProjectId> order;       // every project, best first
  Money remainder;
  RemainderPolicy policy = RemainderPolicy::skip;

  [[nodiscard]] Money total_funded() const;
  friend bool operator==(const AllocationResult&, const AllocationResult&) = default;
};

// Orders projects by (score desc, tie_break) and walks the order funding full costs.
// Only projects with a positive score are eligible. At the first project that does not fit:
//   partial: it receives the remainder and the walk stops
//   skip:    the walk continues, funding any later project that still fits
//   leave:   the walk stops and the remainder is reported
AllocationResult rank_and_allocate(const ScoreVector& scores, const Election& election, RemainderPolicy policy,
                                   const TieBreak& tie_break = tie_break_by_ordering());

// Funds single units in decreasing approval count, ties by project tie_break then lower unit index,
// until the budget or the demanded units run out.
AllocationResult allocate_per_dollar(const std::vector<StepFunction>& steps, const Election& election,
                                     const TieBreak& tie_break = tie_break_by_ordering());

// Ranking-ballot aggregation methods: K-approval, the Borda family, inferred knapsack.
struct RankingAggregation {
  enum class Kind { approval, borda, knapsack_partial, knapsack_skip };

  Kind kind = Kind::approval;
  int k = 1;  // approval only
  BordaVariant borda;

  [[nodiscard]] std::string label() const;  // app1.., full_v, ..., kn_p, kn_s
  static RankingAggregation parse(std::string_view label);
  // app1..app5, full_v, full_k, mk, k1_v, k1_k, kn_p, kn_s
  static std::vector<RankingAggregation> standard_set();
};

ScoreVector score_ranking_as(const RankingAggregation& method, const std::vector<RankingBallot>& rankings,
                             const Election& election);
AllocationResult aggregate_ranking_as(const RankingAggregation& method, const std::vector<RankingBallot>& rankings,
                                      const Election& election);

// funded_j / budget in election project order.
std::vector<double> allocation_fraction_vector(const AllocationResult& result, const Election& election);

// dot / (|a| |b|); 0 when either vector is all zero. Throws std::invalid_argument on length mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace pbvote
