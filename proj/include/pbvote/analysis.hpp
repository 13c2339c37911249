#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbvote/model.hpp"

namespace pbvote {

// One voter's two ballots in the same election (primary/secondary, or any derived pair).
struct VotePair {
  VoterId voter_id;
  Ballot first;
  Ballot second;
};

// ---------------------------------------------------------------------------
// Budget overlap utility

// Sum over projects of the smaller approved amount between the two ballots.
Money overlap_utility(const Ballot& a, const Ballot& b, const Election& election);
// Throws std::invalid_argument when the envelopes belong to different elections.
Money overlap_utility(const BallotEnvelope& a, const BallotEnvelope& b, const Election& election);

struct OverlapStat {
  VoterId voter_id;
  Money u_self;                  // overlap of the voter's first ballot with their own second ballot
  double percentile = 0.0;       // share of all second ballots whose overlap is <= u_self (self included)
  std::optional<double> z_score; // nullopt when every overlap is equal
};

// Compares voter `index`'s first ballot against every voter's second ballot.
// Requires at least two pairs.
OverlapStat overlap_percentile_z(std::size_t index, const std::vector<VotePair>& pairs, const Election& election);
std::vector<OverlapStat> overlap_stats(const std::vector<VotePair>& pairs, const Election& election);

struct ElectionOverlap {
  ElectionId election_id;
  std::string first_label;   // e.g. "app"
  std::string second_label;  // e.g. "knap"
  std::vector<OverlapStat> stats;
};

struct ElectionLevelSummary {
  double median = 0.0;
  double mean = 0.0;
  double min = 0.0;
};

struct VoterLevelSummary {
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;
  bool std_defined = false;  // false with a single voter; std is then reported as 0
};

// One row per ballot-method pair: statistics of per-election medians and of pooled voters.
struct OverlapSummaryRow {
  std::string first_label;
  std::string second_label;
  std::size_t n_elections = 0;
  ElectionLevelSummary election_percentile;
  VoterLevelSummary voter_percentile;
  std::optional<ElectionLevelSummary> election_z;  // nullopt when no z-score is defined
  std::optional<VoterLevelSummary> voter_z;
};

// Rows in order of first appearance of each label pair; `with_total` appends an "all"/"all" row.
std::vector<OverlapSummaryRow> election_overlap_summary(const std::vector<ElectionOverlap>& groups,
                                                        bool with_total = true);

// ---------------------------------------------------------------------------
// Cost statistics

enum class CostStatistic { top1, top3, avg };
inline constexpr std::array<CostStatistic, 3> kCostStatistics{CostStatistic::top1, CostStatistic::top3,
                                                              CostStatistic::avg};
std::string_view to_string(CostStatistic stat);

// Costs of selected projects as fractions of the budget. A project counts as selected
// when its approved amount is positive, at its full cost.
struct CostStats {
  double top1 = 0.0;
  double top3_avg = 0.0;  // over min(3, n_selected) projects
  double avg_all = 0.0;
  int n_selected = 0;

  [[nodiscard]] double get(CostStatistic stat) const;
};

// nullopt for an empty selection.
std::optional<CostStats> cost_stats(const Ballot& ballot, const Election& election);

struct CostPair {
  VoterId voter_id;
  CostStats first;
  CostStats second;
};

// Voters with an empty ballot on either side are dropped.
std::vector<CostPair> cost_pairs(const std::vector<VotePair>& pairs, const Election& election);

struct PairedCostDiff {
  std::size_t n = 0;
  std::array<double, 3> mean_diff{};                 // indexed by CostStatistic
  std::array<std::vector<double>, 3> per_voter_diff;  // first - second

  [[nodiscard]] double mean(CostStatistic stat) const { return mean_diff[static_cast<std::size_t>(stat)]; }
  [[nodiscard]] const std::vector<double>& diffs(CostStatistic stat) const {
    return per_voter_diff[static_cast<std::size_t>(stat)];
  }
};

// Throws std::invalid_argument with fewer than two usable pairs.
PairedCostDiff paired_cost_diff(const std::vector<CostPair>& pairs);
PairedCostDiff paired_cost_diff(const std::vector<VotePair>& pairs, const Election& election);

enum class Majority { first, second, none };
std::string_view to_string(Majority majority);

struct NetShift {
  int higher_first = 0;
  int higher_second = 0;
  int ties = 0;
  Majority majority = Majority::none;

  friend bool operator==(const NetShift&, const NetShift&) = default;
};

NetShift net_shift(const std::vector<CostPair>& pairs, CostStatistic stat);

// Per statistic: number of elections whose majority had the higher value on the first / second ballot.
struct NetShiftOverview {
  int n_elections = 0;
  std::array<int, 3> majority_first{};
  std::array<int, 3> majority_second{};

  friend bool operator==(const NetShiftOverview&, const NetShiftOverview&) = default;
};

NetShiftOverview net_shift_overview(const std::vector<std::vector<CostPair>>& per_election);

// ---------------------------------------------------------------------------
// Percentile bootstrap of a mean difference

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const ConfidenceInterval&, const ConfidenceInterval&) = default;
};

struct BootstrapResult {
  double mean_diff = 0.0;
  double resampled_mean = 0.0;  // mean of the bootstrap means
  ConfidenceInterval ci95;
  ConfidenceInterval ci99;
  bool sig95 = false;
  bool sig99 = false;
  int n_sim = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const BootstrapResult&, const BootstrapResult&) = default;
};

// Resamples the differences with replacement n_sim times. Each resample draws from its own
// generator derived from (seed, resample index), so the result does not depend on scheduling.
// Requires at least two differences and n_sim >= 100.
BootstrapResult bootstrap_test(std::span<const double> diffs, int n_sim = 1000, std::uint64_t seed = 0);

// "**" when significant at 99%, "*" at 95%, otherwise empty.
std::string significance_marker(const BootstrapResult& result);

}  // namespace pbvote
