#include <doctest.h>

#include <random>

#include "pbvote/aggregation.hpp"
#include "pbvote/inference.hpp"
#include "pbvote/results.hpp"
#include "support.hpp"

using namespace pbvote;
using pbtest::worked_example;

namespace {

std::map<std::string, std::int64_t> funded_cents(const AllocationResult& r) {
  std::map<std::string, std::int64_t> out;
  for (const auto& [id, m] : r.funded) out[id] = m.in_cents();
  return out;
}

std::vector<std::string> ids_of(const Election& e) {
  std::vector<std::string> out;
  for (const auto& p : e.ordered_projects()) out.push_back(p.id);
  return out;
}

std::vector<std::pair<std::string, std::int64_t>> costs_of(const Election& e, std::int64_t unit = 1) {
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (const auto& p : e.ordered_projects()) out.emplace_back(p.id, p.cost.in_cents() / unit);
  return out;
}

std::map<std::string, double> doubles(const ScoreVector& s) {
  std::map<std::string, double> out;
  for (const auto& [id, hp] : s.half_points) out[id] = static_cast<double>(hp) / 2.0;
  return out;
}

}  // namespace

TEST_CASE("worked example under each remainder policy") {
  const auto e = worked_example();
  const RankingBallot ranking{{"A", "B", "C"}};
  ScoreVector s;
  s.half_points = {{"A", 6}, {"B", 4}, {"C", 2}};

  auto partial = rank_and_allocate(s, e, RemainderPolicy::partial);
  CHECK(funded_cents(partial) == std::map<std::string, std::int64_t>{{"A", 7000}, {"B", 3000}});
  CHECK(partial.remainder.is_zero());

  auto skip = rank_and_allocate(s, e, RemainderPolicy::skip);
  CHECK(funded_cents(skip) == std::map<std::string, std::int64_t>{{"A", 7000}, {"C", 3000}});

  auto leave = rank_and_allocate(s, e, RemainderPolicy::leave);
  CHECK(funded_cents(leave) == std::map<std::string, std::int64_t>{{"A", 7000}});
  CHECK(leave.remainder == Money::dollars(30));
  CHECK(leave.order == std::vector<ProjectId>{"A", "B", "C"});

  CHECK(infer_knapsack(ranking, e, InferMode::partial).allocations ==
        std::map<ProjectId, Money>{{"A", Money::dollars(70)}, {"B", Money::dollars(30)}});
  CHECK(infer_knapsack(ranking, e, InferMode::skip).allocations ==
        std::map<ProjectId, Money>{{"A", Money::dollars(70)}, {"C", Money::dollars(30)}});
}

TEST_CASE("borda formulas on a short ballot") {
  const auto e = pbtest::election_with_costs({1, 1, 1, 1, 1}, 10, {MethodKind::ranking, 2, true, std::nullopt});
  const RankingBallot b{{"p1", "p2"}};
  auto full = score_borda({b}, {BordaFamily::full, KSource::voter}, e);
  CHECK(full.score("p1") == 4.0);
  CHECK(full.score("p2") == 3.0);
  for (const char* p : {"p3", "p4", "p5"}) CHECK(full.score(p) == 1.0);

  auto k1 = score_borda({b}, {BordaFamily::k1, KSource::voter}, e);
  CHECK(k1.score("p1") == 2.0);
  CHECK(k1.score("p2") == 1.0);
  CHECK(k1.score("p3") == 0.0);

  auto mk = score_borda({b}, {BordaFamily::mk, KSource::voter}, e);
  CHECK(mk.score("p1") == 4.0);
  CHECK(mk.score("p5") == 0.0);
}

TEST_CASE("borda family matches the direct formulas") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 8);
    const int k = 1 + static_cast<int>(rng() % m);
    std::vector<std::int64_t> costs(m, 10);
    const auto e = pbtest::election_with_costs(costs, 100, {MethodKind::ranking, k, true, std::nullopt});
    const auto ids = ids_of(e);
    std::vector<RankingBallot> ballots;
    std::vector<std::vector<std::string>> raw;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int v = 0; v < n; ++v) {
      auto order = ids;
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(rng() % (k + 1));
      ballots.push_back({order});
      raw.push_back(order);
    }
    for (auto family : {BordaFamily::full, BordaFamily::mk, BordaFamily::k1})
      for (auto source : {KSource::voter, KSource::election}) {
        const std::string name = family == BordaFamily::full ? "full" : family == BordaFamily::mk ? "mk" : "k1";
        CHECK(doubles(score_borda(ballots, {family, source}, e)) ==
              pbtest::oracle::borda(raw, ids, name, source == KSource::election ? k : 0));
      }
  }
}

TEST_CASE("full and mk agree on complete rankings") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 6);
    const auto e = pbtest::election_with_costs(std::vector<std::int64_t>(m, 5), 50, {MethodKind::ranking, m, true, std::nullopt});
    std::vector<RankingBallot> ballots;
    for (int v = 0; v < 7; ++v) {
      auto order = ids_of(e);
      std::shuffle(order.begin(), order.end(), rng);
      ballots.push_back({order});
    }
    auto full = score_borda(ballots, {BordaFamily::full, KSource::voter}, e);
    auto mk = score_borda(ballots, {BordaFamily::mk, KSource::voter}, e);
    CHECK(full.half_points == mk.half_points);
  }
}

TEST_CASE("approval, token and knapsack-count scores") {
  const auto e = worked_example({MethodKind::approval, 3, true, std::nullopt});
  auto s = score_approval({{{"A", "B", "C"}}, {{"A", "B"}}, {{"A"}}}, e);
  CHECK(s.score("A") == 3.0);
  CHECK(s.score("B") == 2.0);
  CHECK(s.score("C") == 1.0);
  CHECK(funded_cents(rank_and_allocate(s, e, RemainderPolicy::skip)) ==
        std::map<std::string, std::int64_t>{{"A", 7000}, {"C", 3000}});

  s = score_token({TokenBallot{{{"B", 3}}}, TokenBallot{{{"C", 1}, {"B", 1}}}}, e);
  CHECK(s.score("B") == 4.0);
  CHECK(s.score("A") == 0.0);
  // Zero-scored projects are never funded.
  CHECK(funded_cents(rank_and_allocate(s, e, RemainderPolicy::skip)) ==
        std::map<std::string, std::int64_t>{{"B", 5000}, {"C", 3000}});

  s = score_knapsack_counts({KnapsackBallot{{{"A", Money::dollars(10)}}}, KnapsackBallot{{{"A", Money::dollars(70)}}}}, e);
  CHECK(s.score("A") == 2.0);
}

TEST_CASE("ties go to the lower ordering") {
  const auto e = worked_example({MethodKind::approval, 3, true, std::nullopt});
  auto s = score_approval({{{"C", "B"}}}, e);
  CHECK(rank_and_allocate(s, e, RemainderPolicy::skip).order == std::vector<ProjectId>{"B", "C", "A"});
}

TEST_CASE("allocation matches the reference walk on random scores") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 8);
    std::vector<std::int64_t> costs;
    for (int j = 0; j < m; ++j) costs.push_back(1 + static_cast<std::int64_t>(rng() % 50));
    const auto e = pbtest::election_with_costs(costs, 1 + static_cast<std::int64_t>(rng() % 120),
                                               {MethodKind::approval, m, true, std::nullopt});
    ScoreVector s;
    std::map<std::string, double> raw;
    for (const auto& p : e.projects) {
      const auto hp = static_cast<std::int64_t>(rng() % 7);
      s.half_points[p.id] = hp;
      raw[p.id] = static_cast<double>(hp) / 2.0;
    }
    for (auto [policy, name] : {std::pair{RemainderPolicy::partial, "partial"}, std::pair{RemainderPolicy::skip, "skip"},
                                std::pair{RemainderPolicy::leave, "leave"}}) {
      std::int64_t remainder = 0;
      const auto expected = pbtest::oracle::allocate(raw, costs_of(e), e.budget.in_cents(), name, &remainder);
      const auto got = rank_and_allocate(s, e, policy);
      CHECK(funded_cents(got) == expected);
      CHECK(got.remainder.in_cents() == remainder);
      CHECK(got.total_funded() + got.remainder == e.budget);
    }
  }
}

TEST_CASE("per-dollar aggregation equals single-dollar expansion") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 5);
    std::vector<std::int64_t> costs;
    for (int j = 0; j < m; ++j) costs.push_back(1 + static_cast<std::int64_t>(rng() % 40));
    const std::int64_t budget = 1 + static_cast<std::int64_t>(rng() % 100);
    const auto e = pbtest::election_with_costs(costs, budget, {MethodKind::knapsack, std::nullopt, true, Money::dollars(1)});
    std::vector<KnapsackBallot> ballots;
    std::vector<std::map<std::string, std::int64_t>> raw;
    for (int v = 0; v < 1 + static_cast<int>(rng() % 8); ++v) {
      KnapsackBallot b;
      std::map<std::string, std::int64_t> r;
      for (const auto& p : e.projects)
        if (rng() % 2) {
          const auto d = 1 + static_cast<std::int64_t>(rng() % (p.cost.in_cents() / 100));
          b.allocations[p.id] = Money::dollars(d);
          r[p.id] = d;
        }
      ballots.push_back(b);
      raw.push_back(r);
    }
    const auto got = allocate_per_dollar(score_knapsack_per_dollar(ballots, e), e);
    std::map<std::string, std::int64_t> dollars;
    for (const auto& [id, m2] : got.funded) {
      CHECK(m2.in_cents() % 100 == 0);
      dollars[id] = m2.in_cents() / 100;
    }
    CHECK(dollars == pbtest::oracle::per_dollar_literal(raw, costs_of(e, 100), budget));
  }
}

TEST_CASE("per-dollar step function") {
  const auto e = worked_example({MethodKind::knapsack, std::nullopt, true, Money::dollars(10)});
  const auto steps = score_knapsack_per_dollar(
      {KnapsackBallot{{{"A", Money::dollars(70)}}}, KnapsackBallot{{{"A", Money::dollars(20)}}}}, e);
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].project == "A");
  CHECK(steps[0].value_at(1) == 2);
  CHECK(steps[0].value_at(2000) == 2);
  CHECK(steps[0].value_at(2001) == 1);
  CHECK(steps[0].value_at(7000) == 1);
  CHECK(steps[1].value_at(1) == 0);
}

TEST_CASE("inferred skip knapsack equals the greedy walk on exhaustive cost grids") {
  // Every cost vector over {1..3} for up to 5 projects, every budget up to the total.
  for (int m = 1; m <= 5; ++m) {
    std::vector<std::int64_t> costs(m, 1);
    while (true) {
      std::int64_t sum = 0;
      for (auto c : costs) sum += c;
      std::map<ProjectId, Money> cost_map;
      std::map<std::string, std::int64_t> raw;
      std::vector<ProjectId> ranking;
      for (int j = 0; j < m; ++j) {
        const auto id = "p" + std::to_string(j + 1);
        cost_map[id] = Money::cents(costs[j]);
        raw[id] = costs[j];
        ranking.push_back(id);
      }
      for (std::int64_t b = 1; b <= sum; ++b) {
        const auto got = infer_knapsack(RankingBallot{ranking}, Money::cents(b), cost_map, InferMode::skip);
        std::map<std::string, std::int64_t> g;
        for (const auto& [id, a] : got.allocations) g[id] = a.in_cents();
        CHECK(g == pbtest::oracle::greedy_walk_skip(ranking, raw, b));
        const auto part = infer_knapsack(RankingBallot{ranking}, Money::cents(b), cost_map, InferMode::partial);
        std::map<std::string, std::int64_t> p;
        for (const auto& [id, a] : part.allocations) p[id] = a.in_cents();
        CHECK(p == pbtest::oracle::greedy_walk_partial(ranking, raw, b));
      }
      int j = 0;
      while (j < m && costs[j] == 3) costs[j++] = 1;
      if (j == m) break;
      ++costs[j];
    }
  }
}

TEST_CASE("inference by prefix") {
  CHECK(infer_approval(RankingBallot{{"A", "B", "C"}}, 2).selected == std::vector<ProjectId>{"A", "B"});
  CHECK(infer_approval(RankingBallot{{"A"}}, 3).selected == std::vector<ProjectId>{"A"});
  CHECK(truncate_to_voter_k(RankingBallot{{"A", "B", "C"}}, 1).selected == std::vector<ProjectId>{"A"});
  // Zero remainder gives no zero-amount entry.
  const auto e = pbtest::election_with_costs({50, 50, 10}, 100, {MethodKind::ranking, 3, true, std::nullopt});
  CHECK(infer_knapsack(RankingBallot{{"p1", "p2", "p3"}}, e, InferMode::partial).allocations.size() == 2);
}

TEST_CASE("ranking aggregation labels") {
  for (const auto& m : RankingAggregation::standard_set()) CHECK(RankingAggregation::parse(m.label()).label() == m.label());
  CHECK_THROWS(RankingAggregation::parse("borda"));
  const auto e = worked_example();
  auto r = aggregate_ranking_as(RankingAggregation::parse("kn_s"), {RankingBallot{{"A", "B", "C"}}}, e);
  CHECK(funded_cents(r) == std::map<std::string, std::int64_t>{{"A", 7000}, {"C", 3000}});
}

TEST_CASE("cosine comparator") {
  const std::vector<double> a{0.7, 0.3, 0.0}, b{0.7, 0.0, 0.3};
  CHECK(std::abs(cosine_similarity(a, b) - 0.49 / 0.58) < 1e-12);
  CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));
  CHECK(std::abs(cosine_similarity(a, a) - 1.0) < 1e-12);
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1}, std::vector<double>{0, 1}), std::invalid_argument);

  const auto e = worked_example();
  auto r = aggregate_ranking_as(RankingAggregation::parse("full_v"),
                                {RankingBallot{{"A", "B", "C"}}, RankingBallot{{"A", "C", "B"}}}, e);
  CHECK(allocation_fraction_vector(r, e) == std::vector<double>{0.7, 0.0, 0.3});
}

TEST_CASE("results over method names") {
  const auto e = worked_example();
  std::vector<Ballot> ballots{RankingBallot{{"A", "B", "C"}}, RankingBallot{{"A", "C", "B"}}};
  CHECK(results_methods(MethodKind::ranking).size() == 13);
  const auto r = compute_results(e, ballots);
  CHECK(r.method == "full_k");
  CHECK(funded_cents(r.allocation) == std::map<std::string, std::int64_t>{{"A", 7000}, {"C", 3000}});
  CHECK(funded_cents(compute_results(e, ballots, "mk", RemainderPolicy::partial).allocation) ==
        std::map<std::string, std::int64_t>{{"A", 7000}, {"B", 3000}});
  CHECK_THROWS_AS(compute_results(e, ballots, "approval"), MethodIncompatible);
  CHECK_THROWS_AS(compute_results(e, ballots, "nope"), MethodIncompatible);

  const auto k = worked_example({MethodKind::knapsack, std::nullopt, true, Money::dollars(10)});
  std::vector<Ballot> kb{KnapsackBallot{{{"A", Money::dollars(40)}}}};
  CHECK(compute_results(k, kb).method == "per_dollar");
  CHECK_THROWS_AS(compute_results(k, kb, "per_dollar", RemainderPolicy::skip), MethodIncompatible);
  CHECK_THROWS_AS(compute_results(k, kb, "full_v"), MethodIncompatible);
}

TEST_CASE("scoring then allocation composes like the reference pipeline") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 5);
    const int k = 1 + static_cast<int>(rng() % m);
    std::vector<std::int64_t> costs;
    for (int j = 0; j < m; ++j) costs.push_back(1 + static_cast<std::int64_t>(rng() % 30));
    auto e = pbtest::election_with_costs(costs, 10 + static_cast<std::int64_t>(rng() % 60),
                                         {MethodKind::ranking, k, true, std::nullopt});
    const auto ids = ids_of(e);
    std::vector<Ballot> ballots;
    std::vector<std::vector<std::string>> raw;
    for (int v = 0; v < 1 + static_cast<int>(rng() % 5); ++v) {
      auto order = ids;
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(1 + rng() % k);
      ballots.push_back(RankingBallot{order});
      raw.push_back(order);
    }
    for (auto [label, family, ke] : {std::tuple{"full_v", "full", 0}, std::tuple{"full_k", "full", k},
                                     std::tuple{"mk", "mk", 0}, std::tuple{"k1_k", "k1", k}})
      for (auto [policy, name] : {std::pair{RemainderPolicy::partial, "partial"}, std::pair{RemainderPolicy::skip, "skip"},
                                  std::pair{RemainderPolicy::leave, "leave"}}) {
        const auto got = compute_results(e, ballots, std::string(label), policy);
        const auto expected =
            pbtest::oracle::allocate(pbtest::oracle::borda(raw, ids, family, ke), costs_of(e), e.budget.in_cents(), name);
        CHECK(funded_cents(got.allocation) == expected);
      }
  }
}
