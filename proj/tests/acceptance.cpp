// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit when any fails.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "pbvote/aggregation.hpp"
#include "pbvote/analysis.hpp"
#include "pbvote/dataset.hpp"
#include "pbvote/inference.hpp"
#include "pbvote/regression.hpp"
#include "pbvote/results.hpp"
#include "pbvote/service.hpp"
#include "pbvote/stats.hpp"
#include "pbvote/synthetic.hpp"
#include "support.hpp"

using namespace pbvote;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few mismatches of a criterion.
class Check {
public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 3) notes_ << (notes_.tellp() > 0 ? "; " : "") << what;
  }
  void note(const std::string& text) { notes_ << (notes_.tellp() > 0 ? "; " : "") << text; }
  [[nodiscard]] bool ok() const { return failures_ == 0; }
  [[nodiscard]] std::string detail() const { return notes_.str(); }
  [[nodiscard]] int failures() const { return failures_; }

private:
  int failures_ = 0;
  std::ostringstream notes_;
};

int failed = 0;

void report(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  if (!c.ok()) ++failed;
  std::cout << (c.ok() ? "PASS " : "FAIL ") << name;
  if (!c.detail().empty()) std::cout << " [" << c.detail() << "]";
  std::cout << '\n';
}

using Cents = std::map<std::string, std::int64_t>;

Cents cents_of(const std::map<ProjectId, Money>& m) {
  Cents out;
  for (const auto& [id, v] : m) out[id] = v.in_cents();
  return out;
}

std::vector<std::string> ids_of(const Election& e) {
  std::vector<std::string> out;
  for (const auto& p : e.ordered_projects()) out.push_back(p.id);
  return out;
}

std::vector<std::pair<std::string, std::int64_t>> dollar_costs(const Election& e) {
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (const auto& p : e.ordered_projects()) out.emplace_back(p.id, p.cost.in_cents() / 100);
  return out;
}

std::map<std::string, double> as_doubles(const ScoreVector& s) {
  std::map<std::string, double> out;
  for (const auto& [id, hp] : s.half_points) out[id] = static_cast<double>(hp) / 2.0;
  return out;
}

std::vector<VotePair> pairs_of(const SyntheticElection& se) {
  std::vector<VotePair> out;
  for (std::size_t i = 0; i < se.primary.size(); ++i)
    out.push_back({se.primary[i].voter_id, se.primary[i].ballot, se.secondary[i].ballot});
  return out;
}

void worked_example(Check& c) {
  const auto e = pbtest::worked_example();
  const RankingBallot ranking{{"A", "B", "C"}};
  const Cents partial{{"A", 7000}, {"B", 3000}}, skip{{"A", 7000}, {"C", 3000}}, leave{{"A", 7000}};

  const auto start = Clock::now();
  // The ranking A > B > C as an aggregate score order.
  const auto scores = score_approval({{{"A", "B", "C"}}, {{"A", "B"}}, {{"A"}}}, e);
  const auto p = rank_and_allocate(scores, e, RemainderPolicy::partial);
  const auto s = rank_and_allocate(scores, e, RemainderPolicy::skip);
  const auto l = rank_and_allocate(scores, e, RemainderPolicy::leave);
  // The same ranking as one voter's ballot walked by the inference.
  const auto ip = infer_knapsack(ranking, e, InferMode::partial);
  const auto is = infer_knapsack(ranking, e, InferMode::skip);
  const auto elapsed = Clock::now() - start;

  c.expect(cents_of(p.funded) == partial, "partial allocation");
  c.expect(cents_of(s.funded) == skip, "skip allocation");
  c.expect(cents_of(l.funded) == leave, "leave allocation");
  c.expect(l.remainder == Money::dollars(30), "leave remainder");
  c.expect(cents_of(ip.allocations) == partial, "partial inference");
  c.expect(cents_of(is.allocations) == skip, "skip inference");
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count();
  c.expect(elapsed < std::chrono::milliseconds(1), "took " + std::to_string(us) + " us");
  c.note(std::to_string(us) + " us");
}

void borda_suite(Check& c) {
  const auto five = pbtest::election_with_costs({1, 1, 1, 1, 1}, 10, {MethodKind::ranking, 2, true, std::nullopt});
  const RankingBallot b{{"p1", "p2"}};
  const auto full = score_borda({b}, {BordaFamily::full, KSource::voter}, five);
  c.expect(full.score("p1") == 4 && full.score("p2") == 3, "full_v ranked scores");
  for (const char* p : {"p3", "p4", "p5"}) c.expect(full.score(p) == 1.0, "full_v unranked score");
  const auto k1 = score_borda({b}, {BordaFamily::k1, KSource::voter}, five);
  c.expect(k1.score("p1") == 2 && k1.score("p2") == 1 && k1.score("p3") == 0, "k1_v scores");

  std::mt19937_64 rng(1);
  int instances = 0;
  for (; instances < 1000; ++instances) {
    const int m = 2 + static_cast<int>(rng() % 9);
    const int k = 1 + static_cast<int>(rng() % m);
    const auto e = pbtest::election_with_costs(std::vector<std::int64_t>(m, 10), 100, {MethodKind::ranking, k, true, std::nullopt});
    const auto ids = ids_of(e);
    const bool complete = instances % 4 == 0;
    std::vector<RankingBallot> ballots;
    std::vector<std::vector<std::string>> raw;
    for (int v = 0, n = 1 + static_cast<int>(rng() % 20); v < n; ++v) {
      auto order = ids;
      std::shuffle(order.begin(), order.end(), rng);
      if (!complete) order.resize(rng() % (k + 1));
      ballots.push_back({order});
      raw.push_back(order);
    }
    for (auto family : {BordaFamily::full, BordaFamily::mk, BordaFamily::k1})
      for (auto source : {KSource::voter, KSource::election}) {
        const std::string name = family == BordaFamily::full ? "full" : family == BordaFamily::mk ? "mk" : "k1";
        const auto got = score_borda(ballots, {family, source}, e);
        c.expect(as_doubles(got) == pbtest::oracle::borda(raw, ids, name, source == KSource::election ? k : 0),
                 "instance " + std::to_string(instances) + " " + name);
      }
    if (complete)
      c.expect(score_borda(ballots, {BordaFamily::full, KSource::voter}, e).half_points ==
                   score_borda(ballots, {BordaFamily::mk, KSource::voter}, e).half_points,
               "full != mk on complete rankings");
  }
  c.note(std::to_string(instances) + " instances");
}

void oracle_equivalence(Check& c) {
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    std::mt19937_64 rng(seed);
    const int m = 1 + static_cast<int>(rng() % 6);
    std::vector<std::int64_t> costs;
    for (int j = 0; j < m; ++j) costs.push_back(1 + static_cast<std::int64_t>(rng() % 80));
    const std::int64_t budget = 1 + static_cast<std::int64_t>(rng() % 200);
    const auto e = pbtest::election_with_costs(costs, budget, {MethodKind::knapsack, std::nullopt, true, Money::dollars(1)});
    std::vector<KnapsackBallot> ballots;
    std::vector<std::map<std::string, std::int64_t>> raw;
    for (int v = 0, n = 1 + static_cast<int>(rng() % 10); v < n; ++v) {
      KnapsackBallot b;
      std::map<std::string, std::int64_t> r;
      std::int64_t left = budget;
      for (const auto& p : e.projects) {
        const auto cap = std::min(left, p.cost.in_cents() / 100);
        if (cap == 0 || rng() % 3 == 0) continue;
        const auto d = 1 + static_cast<std::int64_t>(rng() % cap);
        b.allocations[p.id] = Money::dollars(d);
        r[p.id] = d;
        left -= d;
      }
      ballots.push_back(b);
      raw.push_back(r);
    }
    const auto got = allocate_per_dollar(score_knapsack_per_dollar(ballots, e), e);
    Cents dollars;
    for (const auto& [id, amount] : got.funded) dollars[id] = amount.in_cents() / 100;
    const bool ok = dollars == pbtest::oracle::per_dollar_literal(raw, dollar_costs(e), budget);
    if (!ok) ++mismatches;
    c.expect(ok, "per-dollar seed " + std::to_string(seed));
  }

  long walks = 0;
  for (int m = 1; m <= 8; ++m) {
    std::vector<std::int64_t> costs(m, 1);
    while (true) {
      std::int64_t sum = 0;
      std::map<ProjectId, Money> cost_map;
      std::map<std::string, std::int64_t> raw;
      std::vector<ProjectId> ranking;
      for (int j = 0; j < m; ++j) {
        const auto id = "p" + std::to_string(j + 1);
        cost_map[id] = Money::cents(costs[j]);
        raw[id] = costs[j];
        ranking.push_back(id);
        sum += costs[j];
      }
      for (std::int64_t b = 1; b <= sum; ++b, ++walks) {
        const auto got = infer_knapsack(RankingBallot{ranking}, Money::cents(b), cost_map, InferMode::skip);
        const bool ok = cents_of(got.allocations) == pbtest::oracle::greedy_walk_skip(ranking, raw, b);
        if (!ok) ++mismatches;
        c.expect(ok, "greedy walk m=" + std::to_string(m) + " budget=" + std::to_string(b));
      }
      int j = 0;
      while (j < m && costs[j] == 3) costs[j++] = 1;
      if (j == m) break;
      ++costs[j];
    }
  }
  c.note("500 seeds, " + std::to_string(walks) + " walks, " + std::to_string(mismatches) + " mismatches");
}

void overlap_pipeline(Check& c) {
  SyntheticModel model;
  model.num_voters = 20;
  model.num_projects = 10;
  model.ballot_noise = 0.0;
  model.secondary = SecondaryKind::knapsack_partial;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pop = synthetic_population(seed, model);
    const auto& se = pop.elections[0];
    const auto pairs = pairs_of(se);
    const auto stats = overlap_stats(pairs, se.election);
    std::vector<double> z;
    for (const auto& s : stats) {
      c.expect(s.percentile == 1.0, "percentile below 1 at seed " + std::to_string(seed));
      if (s.z_score) z.push_back(*s.z_score);
    }
    c.expect(!z.empty() && stats::median(z) > 0.0, "median z not positive at seed " + std::to_string(seed));
  }

  model.ballot_noise = 0.3;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    model.secondary = seed % 3 == 0 ? SecondaryKind::approval : seed % 3 == 1 ? SecondaryKind::knapsack_partial
                                                                             : SecondaryKind::knapsack_skip;
    const auto pop = synthetic_population(seed, model);
    const auto& se = pop.elections[0];
    const auto pairs = pairs_of(se);
    std::vector<std::pair<Ballot, Ballot>> raw;
    for (const auto& p : pairs) raw.emplace_back(p.first, p.second);
    const auto got = overlap_stats(pairs, se.election);
    const auto expected = pbtest::oracle::overlap_double_loop(raw, se.election);
    for (std::size_t i = 0; i < got.size(); ++i) {
      c.expect(got[i].u_self.in_cents() == expected[i].u_self, "u_self");
      c.expect(got[i].percentile == expected[i].percentile, "percentile");
      c.expect(got[i].z_score.has_value() == expected[i].z_defined, "z defined");
      if (got[i].z_score && expected[i].z_defined) c.expect(*got[i].z_score == expected[i].z, "z value");
    }
  }
}

void bootstrap_behavior(Check& c) {
  for (double v : {0.0, 0.25, -0.5}) {
    const auto r = bootstrap_test(std::vector<double>(40, v), 1000, 7);
    c.expect(r.ci95.lo == v && r.ci95.hi == v && r.ci99.lo == v && r.ci99.hi == v, "constant CI not degenerate");
    c.expect(r.sig95 == (v != 0.0) && r.sig99 == (v != 0.0), "constant significance");
  }

  const int n = 100;
  const double mu = 0.1, sd = 0.01 * std::sqrt(static_cast<double>(n));
  int covered = 0;
  for (int run = 0; run < 200; ++run) {
    std::mt19937_64 rng(1000 + run);
    std::normal_distribution<double> dist(mu, sd);
    std::vector<double> xs(n);
    for (auto& x : xs) x = dist(rng);
    if (bootstrap_test(xs, 1000, static_cast<std::uint64_t>(run)).ci95.contains(mu)) ++covered;
  }
  const double coverage = covered / 200.0;
  c.expect(coverage >= 0.92 && coverage <= 0.98, "coverage " + std::to_string(coverage));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> xs(500);
  for (auto& x : xs) x = dist(rng);
  const auto start = Clock::now();
  (void)bootstrap_test(xs, 1000, 1);
  const auto ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  c.expect(ms < 1000.0, "1000 resamples took " + std::to_string(ms) + " ms");
  std::ostringstream note;
  note << "coverage " << coverage << ", 1000x500 in " << static_cast<int>(ms) << " ms";
  c.note(note.str());
}

void ols(Check& c) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 1 + trial % 4;
    const std::size_t n = 10 + static_cast<std::size_t>(trial);
    std::vector<Feature> f;
    std::vector<double> beta{u(rng)};
    for (int j = 0; j < p; ++j) {
      f.push_back({"x" + std::to_string(j), {}});
      beta.push_back(u(rng));
    }
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = beta[0];
      for (int j = 0; j < p; ++j) {
        f[j].values.push_back(u(rng));
        y[i] += beta[j + 1] * f[j].values[i];
      }
    }
    const auto r = ols_regression(y, f);
    worst = std::max(worst, std::abs(r.intercept - beta[0]) / std::abs(beta[0]));
    for (int j = 0; j < p; ++j)
      worst = std::max(worst, std::abs(r.coefficients.at(f[j].name) - beta[j + 1]) / std::abs(beta[j + 1]));
  }
  c.expect(worst <= 1e-9, "relative error " + std::to_string(worst));

  try {
    (void)ols_regression(std::vector<double>{1, 3, 2, 5, 4}, {{"a", {1, 2, 3, 4, 5}}, {"b", {2, 1, 2, 1, 2}}, {"a_copy", {1, 2, 3, 4, 5}}});
    c.expect(false, "duplicated column accepted");
  } catch (const CollinearityError& e) {
    c.expect(e.columns() == std::vector<std::string>{"a_copy"}, "collinear column not named");
  }

  int covered = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> x(0, 5);
    std::vector<Feature> f{{"x1", {}}, {"x2", {}}};
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
      f[0].values.push_back(x(g));
      f[1].values.push_back(x(g));
      y.push_back(1.0 + 0.5 * f[0].values.back() - 2.0 * f[1].values.back() + noise(g));
    }
    const auto r = ols_regression(y, f);
    covered += r.intercept_ci95.contains(1.0) + r.ci95.at("x1").contains(0.5) + r.ci95.at("x2").contains(-2.0);
    total += 3;
  }
  const double coverage = static_cast<double>(covered) / total;
  c.expect(coverage >= 0.92 && coverage <= 0.98, "coverage " + std::to_string(coverage));
  std::ostringstream note;
  note << "max relative error " << worst << ", coverage " << coverage;
  c.note(note.str());
}

void cosine(Check& c) {
  const std::vector<double> a{0.7, 0.3, 0.0}, b{0.7, 0.0, 0.3};
  c.expect(cosine_similarity(a, b) == cosine_similarity(b, a), "not symmetric");
  c.expect(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-12, "identical allocations");
  c.expect(cosine_similarity(std::vector<double>{0.5, 0.5, 0}, std::vector<double>{0, 0, 1}) == 0.0, "disjoint supports");
  // 0.49 / (0.49 + 0.09)
  c.expect(std::abs(cosine_similarity(a, b) - 0.49 / 0.58) <= 1e-12, "hand-computed case");

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(6), y(6);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    c.expect(cosine_similarity(x, y) == cosine_similarity(y, x), "random symmetry");
  }
}

void round_trip(Check& c) {
  SyntheticModel model;
  model.num_elections = 10;
  model.num_voters = 25;
  model.ballot_noise = 0.2;
  const auto bundle = bundle_from_population(synthetic_population(2024, model));
  c.expect(bundle.elections.size() == 10, "bundle size");
  const auto a = pbtest::scratch_dir("accept-a"), b = pbtest::scratch_dir("accept-b");
  export_bundle(bundle, a);
  const auto first = import_bundle(a);
  c.expect(first.diagnostics.clean(), "diagnostics on clean export");
  c.expect(first.bundle == bundle, "import differs from exported bundle");
  export_bundle(first.bundle, b);
  const auto second = import_bundle(b);
  c.expect(second.bundle == first.bundle, "second import differs");
  for (const auto& [name, text] : render_bundle(bundle)) {
    std::ifstream x(a / name, std::ios::binary), y(b / name, std::ios::binary);
    const std::string sx(std::istreambuf_iterator<char>(x), {}), sy(std::istreambuf_iterator<char>(y), {});
    c.expect(sx == text && sy == text, name + " not byte-identical");
  }
  fs::remove_all(a);
  fs::remove_all(b);

  const auto corrupted = import_bundle(pbtest::fixture_dir("corrupted"));
  for (const char* code : {"field_count", "bad_value", "duplicate", "orphan_election", "orphan_voter", "orphan_project",
                           "opaque_id", "conflicting_ballots", "rank_sequence", "invalid_ballot", "kind_mismatch",
                           "election_config"})
    c.expect(corrupted.diagnostics.count(code) > 0, std::string("no ") + code + " diagnostic");
  c.note(std::to_string(corrupted.diagnostics.items.size()) + " diagnostics on the corrupted fixture");
}

void service_durability(Check& c) {
  using namespace pbvote::service;
  const auto dir = pbtest::scratch_dir("accept-store");
  auto options = [&] {
    StoreOptions o;
    o.data_dir = dir;
    o.snapshot_every = 25;
    o.entropy_seed = 8;
    o.clock = [] { return parse_day("2024-01-15"); };
    return o;
  };
  auto e = pbtest::worked_example({MethodKind::ranking, 3, true, std::nullopt});
  e.id = "durable";
  e.secondary_methods = {{MethodKind::approval, 2, true, std::nullopt}, {MethodKind::knapsack, std::nullopt, true, std::nullopt}};

  std::vector<ElectionResults> before;
  ElectionState state_before;
  {
    ElectionStore store(options());
    store.create_election(e, 99);
    store.open_voting("durable");
    const auto codes = store.issue_codes("durable", 60);
    std::mt19937_64 rng(3);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      std::vector<ProjectId> order{"A", "B", "C"};
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(1 + rng() % 3);
      store.submit_ballot("durable", codes[i].code, Slot::primary, RankingBallot{order});
      if (i % 3 == 0) {
        const auto m = store.assign_secondary_method("durable", codes[i].code);
        const Ballot second = m.kind == MethodKind::approval ? Ballot{ApprovalBallot{{order[0]}}}
                                                             : Ballot{KnapsackBallot{{{"C", Money::dollars(30)}}}};
        store.submit_ballot("durable", codes[i].code, Slot::secondary, second);
      }
    }
    store.set_voided("durable", codes[5].voter_id, true);
    for (const auto& m : results_methods(MethodKind::ranking))
      for (auto p : {RemainderPolicy::partial, RemainderPolicy::skip, RemainderPolicy::leave})
        before.push_back(store.get_results("durable", m, p));
    state_before = store.state("durable");
  }
  {
    // A write cut short by the crash.
    std::ofstream log(dir / "log.jsonl", std::ios::app | std::ios::binary);
    log << R"({"seq":100000,"type":"ballot","election_id":"dur)";
  }
  ElectionStore reopened(options());
  c.expect(reopened.state("durable") == state_before, "state differs after replay");
  std::size_t i = 0;
  for (const auto& m : results_methods(MethodKind::ranking))
    for (auto p : {RemainderPolicy::partial, RemainderPolicy::skip, RemainderPolicy::leave}) {
      const auto r = reopened.get_results("durable", m, p);
      c.expect(r.allocation == before[i].allocation && r.scores == before[i].scores, "results differ for " + m);
      ++i;
    }
  fs::remove_all(dir);

  ElectionStore memory(StoreOptions{std::nullopt, 0, today, 12});
  e.id = "uniform";
  memory.create_election(e, 4242);
  const auto codes = memory.issue_codes("uniform", 10000);
  std::size_t first = 0;
  for (const auto& code : codes) first += assignment_index(4242, code.voter_id, 2) == 0;
  const double share = first / 10000.0;
  c.expect(share >= 0.49 && share <= 0.51, "share " + std::to_string(share));
  c.note("first method share " + std::to_string(share));
}

// Elections whose voters hold one approval and one knapsack ballot, oriented (approval, knapsack).
std::vector<std::vector<CostPair>> approval_knapsack_pairs(const DatasetBundle& b) {
  std::vector<std::vector<CostPair>> out;
  for (const auto& rec : b.elections) {
    std::vector<VotePair> pairs;
    for (auto p : b.primary_secondary_pairs(rec.election.id)) {
      const auto k1 = kind_of(p.first), k2 = kind_of(p.second);
      if (k1 == MethodKind::knapsack && k2 == MethodKind::approval) std::swap(p.first, p.second);
      else if (!(k1 == MethodKind::approval && k2 == MethodKind::knapsack)) continue;
      pairs.push_back(std::move(p));
    }
    auto costs = cost_pairs(pairs, rec.election);
    if (costs.size() >= 2) out.push_back(std::move(costs));
  }
  return out;
}

void dataset_replication(const fs::path& dir) {
  std::function<void(Check&)> body = [&](Check& c) {
    const auto r = import_bundle(dir);
    std::vector<const Election*> elections;
    for (const auto& rec : r.bundle.elections) elections.push_back(&rec.election);
    const auto features = election_features(r.bundle, elections);
    const auto corr = pearson_correlation_matrix(features).at("K", "M");
    c.expect(corr && std::abs(*corr - 0.63) <= 0.01, "corr(K, M) " + (corr ? std::to_string(*corr) : "undefined"));

    const auto ov = net_shift_overview(approval_knapsack_pairs(r.bundle));
    const NetShiftOverview expected{17, {10, 9, 16}, {7, 8, 1}};
    c.expect(ov == expected, "approval/knapsack net shift " + std::to_string(ov.n_elections) + " elections, " +
                                 std::to_string(ov.majority_first[0]) + "/" + std::to_string(ov.majority_first[1]) +
                                 "/" + std::to_string(ov.majority_first[2]) + " vs " +
                                 std::to_string(ov.majority_second[0]) + "/" + std::to_string(ov.majority_second[1]) +
                                 "/" + std::to_string(ov.majority_second[2]));
    if (corr) c.note("corr(K, M) = " + std::to_string(*corr));
  };
  report("dataset replication", body);
}

}  // namespace

int main() {
  report("worked example exactness", worked_example);
  report("borda formula suite", borda_suite);
  report("oracle equivalence", oracle_equivalence);
  report("overlap pipeline", overlap_pipeline);
  report("bootstrap behavior", bootstrap_behavior);
  report("ols", ols);
  report("cosine comparator", cosine);
  report("data round trip", round_trip);
  report("service durability and assignment", service_durability);

  const char* env = std::getenv("PBVOTE_DATASET_DIR");
  const fs::path dataset = env ? fs::path(env) : fs::path(PBVOTE_DATASET_DIR);
  if (fs::exists(dataset / tables::kElections))
    dataset_replication(dataset);
  else
    std::cout << "SKIP dataset replication [no dataset at " << dataset.string() << "]\n";

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
