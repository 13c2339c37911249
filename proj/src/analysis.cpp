#include "pbvote/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "pbvote/stats.hpp"

namespace pbvote {

namespace {

using Amounts = std::map<ProjectId, Money>;

Money overlap_of(const Amounts& a, const Amounts& b) {
  Money sum;
  for (const auto& [id, amount] : a) {
    const auto it = b.find(id);
    if (it != b.end()) sum += min(amount, it->second);
  }
  return sum;
}

OverlapStat stat_from(const VoterId& voter, std::size_t index, const std::vector<Money>& utilities) {
  const Money self = utilities[index];
  std::vector<double> u;
  u.reserve(utilities.size());
  std::size_t at_or_below = 0;
  for (Money m : utilities) {
    u.push_back(static_cast<double>(m.in_cents()));
    if (m <= self) ++at_or_below;
  }
  OverlapStat out;
  out.voter_id = voter;
  out.u_self = self;
  out.percentile = static_cast<double>(at_or_below) / static_cast<double>(utilities.size());
  const auto sd = stats::sample_stddev(u);
  if (sd && *sd > 0.0) out.z_score = (u[index] - stats::mean(u)) / *sd;
  return out;
}

// 64-bit mix used to derive independent per-resample seeds.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Money overlap_utility(const Ballot& a, const Ballot& b, const Election& election) {
  return overlap_of(canonical_approved_amounts(a, election), canonical_approved_amounts(b, election));
}

Money overlap_utility(const BallotEnvelope& a, const BallotEnvelope& b, const Election& election) {
  if (a.election_id != b.election_id || a.election_id != election.id)
    throw std::invalid_argument("overlap of ballots from different elections (" + a.election_id + ", " +
                                b.election_id + ")");
  return overlap_utility(a.ballot, b.ballot, election);
}

OverlapStat overlap_percentile_z(std::size_t index, const std::vector<VotePair>& pairs, const Election& election) {
  if (pairs.size() < 2) throw std::invalid_argument("overlap statistics need at least two vote pairs");
  if (index >= pairs.size()) throw std::out_of_range("voter index out of range");
  const auto mine = canonical_approved_amounts(pairs[index].first, election);
  std::vector<Money> utilities;
  utilities.reserve(pairs.size());
  for (const auto& other : pairs) utilities.push_back(overlap_of(mine, canonical_approved_amounts(other.second, election)));
  return stat_from(pairs[index].voter_id, index, utilities);
}

std::vector<OverlapStat> overlap_stats(const std::vector<VotePair>& pairs, const Election& election) {
  if (pairs.size() < 2) throw std::invalid_argument("overlap statistics need at least two vote pairs");
  std::vector<Amounts> firsts, seconds;
  firsts.reserve(pairs.size());
  seconds.reserve(pairs.size());
  for (const auto& p : pairs) {
    firsts.push_back(canonical_approved_amounts(p.first, election));
    seconds.push_back(canonical_approved_amounts(p.second, election));
  }
  std::vector<OverlapStat> out;
  out.reserve(pairs.size());
  std::vector<Money> utilities(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = 0; j < pairs.size(); ++j) utilities[j] = overlap_of(firsts[i], seconds[j]);
    out.push_back(stat_from(pairs[i].voter_id, i, utilities));
  }
  return out;
}

namespace {

ElectionLevelSummary election_level(const std::vector<double>& medians) {
  return {stats::median(medians), stats::mean(medians), stats::minimum(medians)};
}

VoterLevelSummary voter_level(const std::vector<double>& values) {
  VoterLevelSummary s;
  s.median = stats::median(values);
  s.mean = stats::mean(values);
  if (const auto sd = stats::sample_stddev(values)) {
    s.std = *sd;
    s.std_defined = true;
  }
  return s;
}

OverlapSummaryRow summarize(std::string first, std::string second, const std::vector<const ElectionOverlap*>& groups) {
  OverlapSummaryRow row;
  row.first_label = std::move(first);
  row.second_label = std::move(second);
  row.n_elections = groups.size();
  std::vector<double> pct_medians, z_medians, pct_all, z_all;
  for (const auto* g : groups) {
    std::vector<double> pct, z;
    for (const auto& s : g->stats) {
      pct.push_back(s.percentile);
      if (s.z_score) z.push_back(*s.z_score);
    }
    if (pct.empty()) continue;
    pct_medians.push_back(stats::median(pct));
    pct_all.insert(pct_all.end(), pct.begin(), pct.end());
    if (!z.empty()) {
      z_medians.push_back(stats::median(z));
      z_all.insert(z_all.end(), z.begin(), z.end());
    }
  }
  if (pct_all.empty()) throw std::invalid_argument("overlap summary of groups without any voters");
  row.election_percentile = election_level(pct_medians);
  row.voter_percentile = voter_level(pct_all);
  if (!z_all.empty()) {
    row.election_z = election_level(z_medians);
    row.voter_z = voter_level(z_all);
  }
  return row;
}

}  // namespace

std::vector<OverlapSummaryRow> election_overlap_summary(const std::vector<ElectionOverlap>& groups, bool with_total) {
  if (groups.empty()) throw std::invalid_argument("overlap summary of no elections");
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const ElectionOverlap*>> by_key;
  std::vector<const ElectionOverlap*> all;
  for (const auto& g : groups) {
    auto key = std::make_pair(g.first_label, g.second_label);
    if (!by_key.contains(key)) keys.push_back(key);
    by_key[key].push_back(&g);
    all.push_back(&g);
  }
  std::vector<OverlapSummaryRow> rows;
  for (const auto& key : keys) rows.push_back(summarize(key.first, key.second, by_key[key]));
  if (with_total) rows.push_back(summarize("all", "all", all));
  return rows;
}

std::string_view to_string(CostStatistic stat) {
  switch (stat) {
    case CostStatistic::top1: return "top1";
    case CostStatistic::top3: return "top3";
    case CostStatistic::avg: return "avg";
  }
  return "?";
}

double CostStats::get(CostStatistic stat) const {
  switch (stat) {
    case CostStatistic::top1: return top1;
    case CostStatistic::top3: return top3_avg;
    case CostStatistic::avg: return avg_all;
  }
  return 0.0;
}

std::optional<CostStats> cost_stats(const Ballot& ballot, const Election& election) {
  std::vector<std::int64_t> costs;
  for (const auto& [id, amount] : canonical_approved_amounts(ballot, election))
    if (!amount.is_zero()) costs.push_back(election.project(id).cost.in_cents());
  if (costs.empty()) return std::nullopt;
  std::sort(costs.begin(), costs.end(), std::greater<>());

  const auto budget = static_cast<double>(election.budget.in_cents());
  const std::size_t top = std::min<std::size_t>(3, costs.size());
  std::int64_t top_sum = 0, all_sum = 0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (i < top) top_sum += costs[i];
    all_sum += costs[i];
  }
  CostStats s;
  s.n_selected = static_cast<int>(costs.size());
  s.top1 = static_cast<double>(costs.front()) / budget;
  s.top3_avg = static_cast<double>(top_sum) / static_cast<double>(top) / budget;
  s.avg_all = static_cast<double>(all_sum) / static_cast<double>(costs.size()) / budget;
  return s;
}

std::vector<CostPair> cost_pairs(const std::vector<VotePair>& pairs, const Election& election) {
  std::vector<CostPair> out;
  for (const auto& p : pairs) {
    auto a = cost_stats(p.first, election);
    auto b = cost_stats(p.second, election);
    if (a && b) out.push_back({p.voter_id, *a, *b});
  }
  return out;
}

PairedCostDiff paired_cost_diff(const std::vector<CostPair>& pairs) {
  if (pairs.size() < 2)
    throw std::invalid_argument("paired cost difference needs at least two voters, got " + std::to_string(pairs.size()));
  PairedCostDiff out;
  out.n = pairs.size();
  for (const auto stat : kCostStatistics) {
    const auto i = static_cast<std::size_t>(stat);
    for (const auto& p : pairs) out.per_voter_diff[i].push_back(p.first.get(stat) - p.second.get(stat));
    out.mean_diff[i] = stats::mean(out.per_voter_diff[i]);
  }
  return out;
}

PairedCostDiff paired_cost_diff(const std::vector<VotePair>& pairs, const Election& election) {
  return paired_cost_diff(cost_pairs(pairs, election));
}

std::string_view to_string(Majority majority) {
  switch (majority) {
    case Majority::first: return "first";
    case Majority::second: return "second";
    case Majority::none: return "none";
  }
  return "?";
}

NetShift net_shift(const std::vector<CostPair>& pairs, CostStatistic stat) {
  NetShift out;
  for (const auto& p : pairs) {
    const double a = p.first.get(stat), b = p.second.get(stat);
    if (a > b) ++out.higher_first;
    else if (a < b) ++out.higher_second;
    else ++out.ties;
  }
  if (out.higher_first > out.higher_second) out.majority = Majority::first;
  else if (out.higher_second > out.higher_first) out.majority = Majority::second;
  return out;
}

NetShiftOverview net_shift_overview(const std::vector<std::vector<CostPair>>& per_election) {
  NetShiftOverview out;
  out.n_elections = static_cast<int>(per_election.size());
  for (const auto& pairs : per_election)
    for (const auto stat : kCostStatistics) {
      const auto shift = net_shift(pairs, stat);
      const auto i = static_cast<std::size_t>(stat);
      if (shift.majority == Majority::first) ++out.majority_first[i];
      if (shift.majority == Majority::second) ++out.majority_second[i];
    }
  return out;
}

BootstrapResult bootstrap_test(std::span<const double> diffs, int n_sim, std::uint64_t seed) {
  if (diffs.size() < 2) throw std::invalid_argument("bootstrap needs at least two differences");
  if (n_sim < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");

  BootstrapResult r;
  r.n_sim = n_sim;
  r.seed = seed;
  r.mean_diff = stats::mean(diffs);

  const bool constant = std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs.front(); });
  if (constant) {
    const double v = diffs.front();
    r.mean_diff = v;
    r.resampled_mean = v;
    r.ci95 = r.ci99 = {v, v};
    r.sig95 = r.sig99 = v != 0.0;
    return r;
  }

  const std::size_t n = diffs.size();
  std::vector<double> means(static_cast<std::size_t>(n_sim));
  for (int s = 0; s < n_sim; ++s) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += diffs[pick(rng)];
    means[static_cast<std::size_t>(s)] = sum / static_cast<double>(n);
  }
  r.resampled_mean = stats::mean(means);
  std::sort(means.begin(), means.end());
  r.ci95 = {stats::quantile_sorted(means, 0.025), stats::quantile_sorted(means, 0.975)};
  r.ci99 = {stats::quantile_sorted(means, 0.005), stats::quantile_sorted(means, 0.995)};
  r.sig95 = !r.ci95.contains(0.0);
  r.sig99 = !r.ci99.contains(0.0);
  return r;
}

std::string significance_marker(const BootstrapResult& result) {
  if (result.sig99) return "**";
  if (result.sig95) return "*";
  return "";
}

}  // namespace pbvote
