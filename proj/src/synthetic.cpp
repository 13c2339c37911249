#include "pbvote/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace pbvote {

std::string_view to_string(SecondaryKind kind) {
  switch (kind) {
    case SecondaryKind::approval: return "approval";
    case SecondaryKind::knapsack_partial: return "knapsack_partial";
    case SecondaryKind::knapsack_skip: return "knapsack_skip";
  }
  return "?";
}

SecondaryKind parse_secondary_kind(std::string_view text) {
  for (auto k : {SecondaryKind::approval, SecondaryKind::knapsack_partial, SecondaryKind::knapsack_skip})
    if (to_string(k) == text) return k;
  throw std::invalid_argument("unknown secondary kind: '" + std::string(text) + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("model key '" + key + "' expects an integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("model key '" + key + "' expects a number, got '" + v + "'");
}

Money to_dollars(const std::string& key, const std::string& v) {
  try {
    return Money::parse_dollars(v);
  } catch (const std::exception& e) {
    throw std::invalid_argument("model key '" + key + "': " + e.what());
  }
}

}  // namespace

SyntheticModel parse_synthetic_model(std::string_view text) {
  SyntheticModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("model line without '=': '" + trim(line) + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "num_elections") m.num_elections = to_int(key, value);
    else if (key == "num_voters") m.num_voters = to_int(key, value);
    else if (key == "num_projects") m.num_projects = to_int(key, value);
    else if (key == "budget") m.budget = to_dollars(key, value);
    else if (key == "min_cost") m.min_cost = to_dollars(key, value);
    else if (key == "max_cost") m.max_cost = to_dollars(key, value);
    else if (key == "cost_unit") m.cost_unit = to_dollars(key, value);
    else if (key == "costs") {
      m.costs.clear();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) m.costs.push_back(to_dollars(key, trim(item)));
    } else if (key == "ranking_k") m.ranking_k = to_int(key, value);
    else if (key == "taste_spread") m.taste_spread = to_double(key, value);
    else if (key == "ballot_noise") m.ballot_noise = to_double(key, value);
    else if (key == "secondary") m.secondary = parse_secondary_kind(value);
    else if (key == "approval_k") m.approval_k = to_int(key, value);
    else if (key == "policy") m.policy = parse_remainder_policy(value);
    else throw std::invalid_argument("unknown model key '" + key + "'");
  }
  return m;
}

std::string format_synthetic_model(const SyntheticModel& m) {
  std::ostringstream os;
  os << "num_elections=" << m.num_elections << "\nnum_voters=" << m.num_voters << "\nnum_projects=" << m.num_projects
     << "\nbudget=" << m.budget << "\nmin_cost=" << m.min_cost << "\nmax_cost=" << m.max_cost
     << "\ncost_unit=" << m.cost_unit << "\ncosts=";
  for (std::size_t i = 0; i < m.costs.size(); ++i) os << (i ? "," : "") << m.costs[i];
  os << "\nranking_k=" << m.ranking_k << "\ntaste_spread=" << m.taste_spread << "\nballot_noise=" << m.ballot_noise
     << "\nsecondary=" << to_string(m.secondary) << "\napproval_k=" << m.approval_k
     << "\npolicy=" << to_string(m.policy) << "\n";
  return os.str();
}

namespace {

void check_model(const SyntheticModel& m) {
  auto fail = [](const std::string& why) { throw std::invalid_argument("degenerate synthetic model: " + why); };
  if (m.num_elections < 1) fail("num_elections must be >= 1");
  if (m.num_voters < 1) fail("num_voters must be >= 1");
  if (m.num_projects < 1) fail("num_projects must be >= 1");
  if (m.ranking_k < 1 || m.ranking_k > m.num_projects) fail("ranking_k must lie in [1, num_projects]");
  if (m.approval_k < 1) fail("approval_k must be >= 1");
  if (m.ballot_noise < 0.0 || m.ballot_noise > 1.0) fail("ballot_noise must lie in [0, 1]");
  if (m.taste_spread < 0.0) fail("taste_spread must be >= 0");
  if (m.cost_unit.is_zero()) fail("cost_unit must be positive");
  if (m.budget.is_zero() || m.budget.in_cents() % m.cost_unit.in_cents() != 0)
    fail("budget must be a positive multiple of cost_unit");
  if (!m.costs.empty()) {
    if (m.costs.size() != static_cast<std::size_t>(m.num_projects)) fail("costs must list num_projects values");
    for (Money c : m.costs)
      if (c.is_zero() || c.in_cents() % m.cost_unit.in_cents() != 0) fail("costs must be positive multiples of cost_unit");
  } else if (m.min_cost > m.max_cost || m.max_cost < m.cost_unit) {
    fail("cost range must contain a multiple of cost_unit");
  }
}

std::string hex_id(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return std::string(buf).substr(4);
}

RankingBallot perturb(const RankingBallot& ranking, double noise, std::mt19937_64& rng,
                      const std::vector<ProjectId>& ids) {
  if (noise <= 0.0) return ranking;
  std::bernoulli_distribution flip(noise);
  RankingBallot out = ranking;
  for (auto& entry : out.ranked) {
    if (!flip(rng)) continue;
    std::vector<ProjectId> unranked;
    for (const auto& id : ids)
      if (std::find(out.ranked.begin(), out.ranked.end(), id) == out.ranked.end()) unranked.push_back(id);
    if (unranked.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, unranked.size() - 1);
    entry = unranked[pick(rng)];
  }
  for (std::size_t i = 0; i + 1 < out.ranked.size(); ++i)
    if (flip(rng)) std::swap(out.ranked[i], out.ranked[i + 1]);
  return out;
}

}  // namespace

SyntheticPopulation synthetic_population(std::uint64_t seed, const SyntheticModel& model) {
  check_model(model);
  SyntheticPopulation pop;
  pop.seed = seed;
  pop.model = model;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::int64_t unit = model.cost_unit.in_cents();
  const std::int64_t lo_units = std::max<std::int64_t>(1, (model.min_cost.in_cents() + unit - 1) / unit);
  const std::int64_t hi_units = model.max_cost.in_cents() / unit;
  const Day base_day = parse_day("2023-05-01");
  std::set<VoterId> used_ids;

  for (int e = 0; e < model.num_elections; ++e) {
    SyntheticElection se;
    Election& el = se.election;
    el.id = "syn-" + std::to_string(e + 1);
    el.name = "Synthetic election " + std::to_string(e + 1);
    el.budget = model.budget;
    el.method = MethodConfig{MethodKind::ranking, model.ranking_k, true, std::nullopt};
    el.remainder_policy = model.policy;
    if (model.secondary == SecondaryKind::approval)
      el.secondary_methods.push_back(MethodConfig{MethodKind::approval, model.approval_k, true, std::nullopt});
    else
      el.secondary_methods.push_back(MethodConfig{MethodKind::knapsack, std::nullopt, true, model.cost_unit});
    el.languages = {"en"};

    std::uniform_int_distribution<std::int64_t> cost_units(lo_units, hi_units);
    std::vector<ProjectId> ids;
    std::vector<double> quality;
    for (int j = 0; j < model.num_projects; ++j) {
      Project p;
      p.id = std::string(1, static_cast<char>('A' + j % 26)) + (j >= 26 ? std::to_string(j / 26) : "");
      p.election_id = el.id;
      p.ordering = j + 1;
      p.cost = model.costs.empty() ? Money::cents(cost_units(rng) * unit) : model.costs[static_cast<std::size_t>(j)];
      ids.push_back(p.id);
      quality.push_back(normal(rng));
      el.projects.push_back(std::move(p));
    }

    const InferMode mode = model.secondary == SecondaryKind::knapsack_skip ? InferMode::skip : InferMode::partial;
    const auto costs = project_costs(el);
    const Day day{std::chrono::sys_days{base_day} + std::chrono::days{e}};

    std::vector<double> times;
    for (int i = 0; i < model.num_voters; ++i) {
      std::vector<std::pair<double, int>> utility;
      for (int j = 0; j < model.num_projects; ++j)
        utility.emplace_back(quality[static_cast<std::size_t>(j)] + model.taste_spread * normal(rng), j);
      std::stable_sort(utility.begin(), utility.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      RankingBallot ranking;
      for (int r = 0; r < model.ranking_k; ++r) ranking.ranked.push_back(ids[static_cast<std::size_t>(utility[static_cast<std::size_t>(r)].second)]);

      const RankingBallot noisy = perturb(ranking, model.ballot_noise, rng, ids);
      Ballot secondary;
      if (model.secondary == SecondaryKind::approval) secondary = infer_approval(noisy, model.approval_k);
      else secondary = infer_knapsack(noisy, el.budget, costs, mode);

      VoterId vid;
      do {
        vid = hex_id(rng());
      } while (!used_ids.insert(vid).second);

      Voter v;
      v.id = vid;
      v.election_id = el.id;
      v.last_stage = Stage::done;
      v.authentication = "code";
      v.last_day = day;
      times.push_back(uniform(rng));
      se.voters.push_back(std::move(v));
      se.primary.push_back({vid, el.id, Slot::primary, std::move(ranking), day});
      se.secondary.push_back({vid, el.id, Slot::secondary, std::move(secondary), day});
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto faster = std::count_if(times.begin(), times.end(), [&](double t) { return t < times[i]; });
      se.voters[i].time_percentile = static_cast<double>(faster) / static_cast<double>(times.size());
    }
    pop.elections.push_back(std::move(se));
  }
  return pop;
}

}  // namespace pbvote
