#pragma once

// Shared fixtures and independent reference implementations for the test suites.
// The oracles below restate the definitions directly (loops over dollars, explicit walks,
// normal equations) and share no code with the library beyond its value types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "pbvote/model.hpp"

namespace pbtest {

using namespace pbvote;

inline Project make_project(const std::string& id, std::int64_t dollars, int ordering, const std::string& election = "e1") {
  Project p;
  p.id = id;
  p.election_id = election;
  p.cost = Money::dollars(dollars);
  p.ordering = ordering;
  return p;
}

// Budget $100; projects A($70), B($50), C($30).
inline Election worked_example(MethodConfig method = {MethodKind::ranking, 3, true, std::nullopt},
                               RemainderPolicy policy = RemainderPolicy::skip) {
  Election e;
  e.id = "e1";
  e.name = "worked example";
  e.budget = Money::dollars(100);
  e.method = method;
  e.remainder_policy = policy;
  e.projects = {make_project("A", 70, 1), make_project("B", 50, 2), make_project("C", 30, 3)};
  return e;
}

inline Election election_with_costs(const std::vector<std::int64_t>& dollars, std::int64_t budget, MethodConfig method) {
  Election e;
  e.id = "e1";
  e.budget = Money::dollars(budget);
  e.method = method;
  for (std::size_t i = 0; i < dollars.size(); ++i)
    e.projects.push_back(make_project("p" + std::to_string(i + 1), dollars[i], static_cast<int>(i) + 1));
  return e;
}

inline std::filesystem::path fixture_dir(const std::string& name) {
  return std::filesystem::path(PBVOTE_FIXTURE_DIR) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pbvote-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

namespace oracle {

// Borda family straight from the formulas, as doubles (all values are multiples of 0.5).
//   full: rank p -> M - p, unranked -> 0.5 (M - K - 1)
//   mk:   rank p -> M - p, unranked -> 0
//   k1:   rank p -> K - p + 1, unranked -> 0
// K is the ballot length when `k_election` is 0.
inline std::map<std::string, double> borda(const std::vector<std::vector<std::string>>& rankings,
                                           const std::vector<std::string>& projects, const std::string& family,
                                           int k_election) {
  std::map<std::string, double> score;
  for (const auto& p : projects) score[p] = 0.0;
  const double m = static_cast<double>(projects.size());
  for (const auto& r : rankings) {
    const double k = k_election > 0 ? k_election : static_cast<double>(r.size());
    for (const auto& p : projects) {
      const auto it = std::find(r.begin(), r.end(), p);
      if (it == r.end()) {
        if (family == "full") score[p] += 0.5 * (m - k - 1.0);
        continue;
      }
      const double pos = static_cast<double>(it - r.begin()) + 1.0;
      score[p] += family == "k1" ? k - pos + 1.0 : m - pos;
    }
  }
  return score;
}

// Expands every project into single-dollar projects, scores each dollar by the number of voters
// giving the project at least that many dollars, then funds dollars greedily in decreasing
// score, ties by project order then dollar index, while budget remains and the score is positive.
inline std::map<std::string, std::int64_t> per_dollar_literal(const std::vector<std::map<std::string, std::int64_t>>& ballots,
                                                              const std::vector<std::pair<std::string, std::int64_t>>& projects,
                                                              std::int64_t budget) {
  struct Dollar {
    std::int64_t score;
    std::size_t project;
    std::int64_t index;
  };
  std::vector<Dollar> dollars;
  for (std::size_t j = 0; j < projects.size(); ++j)
    for (std::int64_t d = 1; d <= projects[j].second; ++d) {
      std::int64_t votes = 0;
      for (const auto& b : ballots) {
        const auto it = b.find(projects[j].first);
        if (it != b.end() && it->second >= d) ++votes;
      }
      dollars.push_back({votes, j, d});
    }
  std::sort(dollars.begin(), dollars.end(), [](const Dollar& a, const Dollar& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.project != b.project) return a.project < b.project;
    return a.index < b.index;
  });
  std::map<std::string, std::int64_t> funded;
  std::int64_t left = budget;
  for (const auto& d : dollars) {
    if (left == 0 || d.score == 0) break;
    ++funded[projects[d.project].first];
    --left;
  }
  return funded;
}

// Walks the ranking one position at a time with an explicit remaining budget.
inline std::map<std::string, std::int64_t> greedy_walk_skip(const std::vector<std::string>& ranking,
                                                            const std::map<std::string, std::int64_t>& cost,
                                                            std::int64_t budget) {
  std::map<std::string, std::int64_t> funded;
  std::int64_t remaining = budget;
  std::size_t position = 0;
  while (position < ranking.size()) {
    const auto& project = ranking[position];
    const std::int64_t c = cost.at(project);
    if (remaining - c >= 0) {
      funded[project] = c;
      remaining = remaining - c;
    }
    position = position + 1;
  }
  return funded;
}

inline std::map<std::string, std::int64_t> greedy_walk_partial(const std::vector<std::string>& ranking,
                                                               const std::map<std::string, std::int64_t>& cost,
                                                               std::int64_t budget) {
  std::map<std::string, std::int64_t> funded;
  std::int64_t remaining = budget;
  for (const auto& project : ranking) {
    if (remaining == 0) break;
    const std::int64_t c = cost.at(project);
    funded[project] = std::min(c, remaining);
    remaining -= funded[project];
    if (funded[project] < c) break;
  }
  return funded;
}

// Scores -> allocation: sort by (score desc, position in `projects`), walk with the policy.
// Only positive scores are eligible.
inline std::map<std::string, std::int64_t> allocate(const std::map<std::string, double>& score,
                                                    const std::vector<std::pair<std::string, std::int64_t>>& projects,
                                                    std::int64_t budget, const std::string& policy,
                                                    std::int64_t* remainder = nullptr) {
  std::vector<std::size_t> idx(projects.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return score.at(projects[a].first) > score.at(projects[b].first); });
  std::map<std::string, std::int64_t> funded;
  std::int64_t left = budget;
  for (auto i : idx) {
    const auto& [id, c] = projects[i];
    if (score.at(id) <= 0) break;
    if (c <= left) {
      funded[id] = c;
      left -= c;
      continue;
    }
    if (policy == "partial") {
      if (left > 0) funded[id] = left;
      left = 0;
      break;
    }
    if (policy == "leave") break;
  }
  if (remainder) *remainder = left;
  return funded;
}

// Approved amount per project, from the definitions per ballot kind.
inline std::map<std::string, std::int64_t> approved_cents(const Ballot& b, const Election& e) {
  std::map<std::string, std::int64_t> out;
  auto cost_of = [&](const std::string& id) {
    for (const auto& p : e.projects)
      if (p.id == id) return p.cost.in_cents();
    return std::int64_t{0};
  };
  if (auto* a = std::get_if<ApprovalBallot>(&b))
    for (const auto& id : a->selected) out[id] = cost_of(id);
  if (auto* r = std::get_if<RankingBallot>(&b))
    for (const auto& id : r->ranked) out[id] = cost_of(id);
  if (auto* k = std::get_if<KnapsackBallot>(&b))
    for (const auto& [id, m] : k->allocations) out[id] = m.in_cents();
  if (auto* t = std::get_if<TokenBallot>(&b))
    for (const auto& [id, n] : t->tokens)
      if (n > 0) out[id] = cost_of(id);
  return out;
}

struct OverlapRow {
  std::int64_t u_self = 0;
  double percentile = 0.0;
  bool z_defined = false;
  double z = 0.0;
};

// Two nested loops over (voter i, voter i') computing u_ii' from scratch.
inline std::vector<OverlapRow> overlap_double_loop(const std::vector<std::pair<Ballot, Ballot>>& pairs, const Election& e) {
  std::vector<OverlapRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<double> u;
    const auto mine = approved_cents(pairs[i].first, e);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const auto theirs = approved_cents(pairs[j].second, e);
      std::int64_t sum = 0;
      for (const auto& p : e.projects) {
        const auto a = mine.count(p.id) ? mine.at(p.id) : 0;
        const auto b = theirs.count(p.id) ? theirs.at(p.id) : 0;
        sum += std::min(a, b);
      }
      u.push_back(static_cast<double>(sum));
    }
    OverlapRow row;
    row.u_self = static_cast<std::int64_t>(u[i]);
    double at_most = 0;
    for (double x : u)
      if (x <= u[i]) at_most += 1;
    row.percentile = at_most / static_cast<double>(u.size());
    double mean = 0;
    for (double x : u) mean += x;
    mean /= static_cast<double>(u.size());
    double ss = 0;
    for (double x : u) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(u.size() - 1));
    if (sd > 0) {
      row.z_defined = true;
      row.z = (u[i] - mean) / sd;
    }
    rows.push_back(row);
  }
  return rows;
}

// Least squares through the normal equations (X'X) b = X'y.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

}  // namespace oracle

}  // namespace pbtest
