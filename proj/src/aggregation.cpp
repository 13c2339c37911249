#include "pbvote/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace pbvote {

namespace {

ScoreVector zero_scores(const Election& election, std::string label) {
  ScoreVector out;
  out.method_label = std::move(label);
  for (const auto& p : election.projects) out.half_points.emplace(p.id, 0);
  return out;
}

std::int64_t& slot_for(ScoreVector& scores, const ProjectId& id) {
  const auto it = scores.half_points.find(id);
  if (it == scores.half_points.end()) throw std::out_of_range("ballot references unknown project " + id);
  return it->second;
}

}  // namespace

double ScoreVector::score(const ProjectId& project) const { return static_cast<double>(half_points.at(project)) / 2.0; }

std::string BordaVariant::label() const {
  std::string base = family == BordaFamily::full ? "full" : family == BordaFamily::mk ? "mk" : "k1";
  if (family == BordaFamily::mk) return k_source == KSource::voter ? base : base + "_k";
  return base + (k_source == KSource::voter ? "_v" : "_k");
}

ScoreVector score_approval(const std::vector<ApprovalBallot>& ballots, const Election& election) {
  auto out = zero_scores(election, "approval");
  for (const auto& b : ballots)
    for (const auto& id : b.selected) slot_for(out, id) += 2;
  return out;
}

int election_ranking_k(const Election& election) {
  if (election.method.kind == MethodKind::ranking && election.method.k) return *election.method.k;
  for (const auto& m : election.secondary_methods)
    if (m.kind == MethodKind::ranking && m.k) return *m.k;
  throw ConfigError("election " + election.id + " has no ranking method with K");
}

ScoreVector score_borda(const std::vector<RankingBallot>& rankings, BordaVariant variant, const Election& election,
                        std::optional<int> election_k) {
  auto out = zero_scores(election, "borda_" + variant.label());
  const auto m = static_cast<std::int64_t>(election.num_projects());
  std::int64_t k_election = 0;
  if (variant.k_source == KSource::election && variant.family != BordaFamily::mk)
    k_election = election_k ? *election_k : election_ranking_k(election);

  for (const auto& ballot : rankings) {
    const auto k_voter = static_cast<std::int64_t>(ballot.ranked.size());
    const std::int64_t k = variant.k_source == KSource::voter ? k_voter : k_election;

    // Unranked bonus: 0.5 (M - K - 1), i.e. (M - K - 1) half-points.
    if (variant.family == BordaFamily::full) {
      const std::int64_t bonus = m - k - 1;
      for (auto& [id, pts] : out.half_points)
        if (std::find(ballot.ranked.begin(), ballot.ranked.end(), id) == ballot.ranked.end()) pts += bonus;
    }
    for (std::int64_t pos = 1; pos <= k_voter; ++pos) {
      const auto& id = ballot.ranked[static_cast<std::size_t>(pos - 1)];
      const std::int64_t points = variant.family == BordaFamily::k1 ? k - pos + 1 : m - pos;
      slot_for(out, id) += 2 * points;
    }
  }
  return out;
}

ScoreVector score_token(const std::vector<TokenBallot>& ballots, const Election& election) {
  auto out = zero_scores(election, "token");
  for (const auto& b : ballots)
    for (const auto& [id, count] : b.tokens) slot_for(out, id) += 2 * static_cast<std::int64_t>(count);
  return out;
}

ScoreVector score_knapsack_counts(const std::vector<KnapsackBallot>& ballots, const Election& election) {
  auto out = zero_scores(election, "knapsack");
  for (const auto& b : ballots)
    for (const auto& [id, amount] : b.allocations)
      if (!amount.is_zero()) slot_for(out, id) += 2;
  return out;
}

std::int64_t StepFunction::value_at(std::int64_t unit) const {
  if (unit < 1 || unit > cost.in_cents()) return 0;
  for (const auto& s : steps)
    if (unit <= s.upto.in_cents()) return s.count;
  return 0;
}

std::vector<StepFunction> score_knapsack_per_dollar(const std::vector<KnapsackBallot>& ballots,
                                                    const Election& election) {
  std::map<ProjectId, std::vector<Money>> amounts;
  for (const auto& b : ballots)
    for (const auto& [id, amount] : b.allocations) {
      (void)election.project(id);
      if (!amount.is_zero()) amounts[id].push_back(amount);
    }

  std::vector<StepFunction> out;
  for (const auto& p : election.ordered_projects()) {
    StepFunction fn{p.id, p.cost, {}};
    auto& a = amounts[p.id];
    std::sort(a.begin(), a.end());
    // Units up to a distinct amount v are approved by every voter allocating at least v.
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i + 1 < a.size() && a[i + 1] == a[i]) continue;
      const auto first_at_level = std::lower_bound(a.begin(), a.end(), a[i]) - a.begin();
      fn.steps.push_back({min(a[i], p.cost), static_cast<std::int64_t>(a.size()) - first_at_level});
    }
    out.push_back(std::move(fn));
  }
  return out;
}

TieBreak tie_break_by_ordering() {
  return [](const Project& a, const Project& b) { return std::tie(a.ordering, a.id) < std::tie(b.ordering, b.id); };
}

Money AllocationResult::total_funded() const { return total(funded); }

AllocationResult rank_and_allocate(const ScoreVector& scores, const Election& election, RemainderPolicy policy,
                                   const TieBreak& tie_break) {
  std::vector<const Project*> order;
  for (const auto& p : election.projects) {
    if (!scores.half_points.contains(p.id)) throw std::invalid_argument("scores missing project " + p.id);
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(), [&](const Project* a, const Project* b) {
    const auto sa = scores.half_points.at(a->id);
    const auto sb = scores.half_points.at(b->id);
    if (sa != sb) return sa > sb;
    return tie_break(*a, *b);
  });

  AllocationResult result;
  result.policy = policy;
  Money remaining = election.budget;
  for (const Project* p : order) result.order.push_back(p->id);
  for (const Project* p : order) {
    if (scores.half_points.at(p->id) <= 0) break;
    if (p->cost <= remaining) {
      result.funded[p->id] = p->cost;
      remaining -= p->cost;
      continue;
    }
    if (policy == RemainderPolicy::partial) {
      if (!remaining.is_zero()) result.funded[p->id] = remaining;
      remaining = Money{};
      break;
    }
    if (policy == RemainderPolicy::leave) break;
  }
  result.remainder = remaining;
  return result;
}

AllocationResult allocate_per_dollar(const std::vector<StepFunction>& steps, const Election& election,
                                     const TieBreak& tie_break) {
  struct Segment {
    const Project* project;
    std::int64_t first_unit;
    std::int64_t last_unit;
    std::int64_t count;
  };
  std::vector<Segment> segments;
  std::vector<const Project*> projects;
  for (const auto& fn : steps) {
    const Project& p = election.project(fn.project);
    projects.push_back(&p);
    std::int64_t lo = 1;
    for (const auto& s : fn.steps) {
      const std::int64_t hi = std::min(s.upto.in_cents(), p.cost.in_cents());
      if (s.count > 0 && hi >= lo) segments.push_back({&p, lo, hi, s.count});
      lo = hi + 1;
    }
  }
  // Within one project counts are non-increasing, so this order matches sorting single units.
  std::sort(segments.begin(), segments.end(), [&](const Segment& a, const Segment& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.project != b.project) return tie_break(*a.project, *b.project);
    return a.first_unit < b.first_unit;
  });

  AllocationResult result;
  result.policy = RemainderPolicy::partial;
  std::int64_t remaining = election.budget.in_cents();
  for (const auto& seg : segments) {
    if (remaining == 0) break;
    const std::int64_t take = std::min(remaining, seg.last_unit - seg.first_unit + 1);
    result.funded[seg.project->id] += Money::cents(take);
    remaining -= take;
  }
  result.remainder = Money::cents(remaining);

  auto top_count = [&](const Project* p) {
    for (const auto& fn : steps)
      if (fn.project == p->id) return fn.value_at(1);
    return std::int64_t{0};
  };
  std::stable_sort(projects.begin(), projects.end(), [&](const Project* a, const Project* b) {
    const auto ca = top_count(a), cb = top_count(b);
    if (ca != cb) return ca > cb;
    return tie_break(*a, *b);
  });
  for (const Project* p : projects) result.order.push_back(p->id);
  return result;
}

std::string RankingAggregation::label() const {
  switch (kind) {
    case Kind::approval: return "app" + std::to_string(k);
    case Kind::borda: return borda.label();
    case Kind::knapsack_partial: return "kn_p";
    case Kind::knapsack_skip: return "kn_s";
  }
  return "?";
}

RankingAggregation RankingAggregation::parse(std::string_view label) {
  RankingAggregation m;
  if (label.starts_with("app") && label.size() > 3) {
    m.kind = Kind::approval;
    try {
      std::size_t used = 0;
      m.k = std::stoi(std::string(label.substr(3)), &used);
      if (used != label.size() - 3 || m.k < 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid approval aggregation label: '" + std::string(label) + "'");
    }
    return m;
  }
  if (label == "kn_p") {
    m.kind = Kind::knapsack_partial;
    return m;
  }
  if (label == "kn_s") {
    m.kind = Kind::knapsack_skip;
    return m;
  }
  m.kind = Kind::borda;
  for (auto family : {BordaFamily::full, BordaFamily::mk, BordaFamily::k1})
    for (auto source : {KSource::voter, KSource::election}) {
      BordaVariant v{family, source};
      if (v.label() == label) {
        m.borda = v;
        return m;
      }
    }
  throw std::invalid_argument("unknown ranking aggregation: '" + std::string(label) + "'");
}

std::vector<RankingAggregation> RankingAggregation::standard_set() {
  std::vector<RankingAggregation> out;
  for (const char* label : {"app1", "app2", "app3", "app4", "app5", "full_v", "full_k", "mk", "k1_v", "k1_k", "kn_p",
                            "kn_s"})
    out.push_back(parse(label));
  return out;
}

ScoreVector score_ranking_as(const RankingAggregation& method, const std::vector<RankingBallot>& rankings,
                             const Election& election) {
  using Kind = RankingAggregation::Kind;
  ScoreVector scores;
  switch (method.kind) {
    case Kind::approval: {
      std::vector<ApprovalBallot> inferred;
      inferred.reserve(rankings.size());
      for (const auto& r : rankings) inferred.push_back(infer_approval(r, method.k));
      scores = score_approval(inferred, election);
      break;
    }
    case Kind::borda:
      scores = score_borda(rankings, method.borda, election);
      break;
    case Kind::knapsack_partial:
    case Kind::knapsack_skip: {
      const auto mode = method.kind == Kind::knapsack_partial ? InferMode::partial : InferMode::skip;
      const auto costs = project_costs(election);
      std::vector<KnapsackBallot> inferred;
      inferred.reserve(rankings.size());
      for (const auto& r : rankings) inferred.push_back(infer_knapsack(r, election.budget, costs, mode));
      scores = score_knapsack_counts(inferred, election);
      break;
    }
  }
  scores.method_label = method.label();
  return scores;
}

AllocationResult aggregate_ranking_as(const RankingAggregation& method, const std::vector<RankingBallot>& rankings,
                                      const Election& election) {
  return rank_and_allocate(score_ranking_as(method, rankings, election), election, election.remainder_policy);
}

std::vector<double> allocation_fraction_vector(const AllocationResult& result, const Election& election) {
  std::vector<double> out;
  const auto budget = static_cast<double>(election.budget.in_cents());
  for (const auto& p : election.ordered_projects()) {
    const auto it = result.funded.find(p.id);
    out.push_back(it == result.funded.end() ? 0.0 : static_cast<double>(it->second.in_cents()) / budget);
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine similarity of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace pbvote
