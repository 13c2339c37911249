#include "pbvote/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

namespace pbvote {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::pair<Enum, std::string_view> (&table)[N], const char* what) {
  for (const auto& [value, name] : table)
    if (name == text) return value;
  throw std::invalid_argument(std::string("unknown ") + what + ": '" + std::string(text) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

constexpr std::pair<MethodKind, std::string_view> kMethodKinds[] = {
    {MethodKind::approval, "approval"},
    {MethodKind::ranking, "ranking"},
    {MethodKind::knapsack, "knapsack"},
    {MethodKind::token, "token"},
};
constexpr std::pair<RemainderPolicy, std::string_view> kPolicies[] = {
    {RemainderPolicy::partial, "partial"},
    {RemainderPolicy::skip, "skip"},
    {RemainderPolicy::leave, "leave"},
};
constexpr std::pair<Slot, std::string_view> kSlots[] = {
    {Slot::primary, "primary"},
    {Slot::secondary, "secondary"},
};
constexpr std::pair<Stage, std::string_view> kStages[] = {
    {Stage::landing, "landing"}, {Stage::primary, "primary"}, {Stage::secondary, "secondary"},
    {Stage::survey, "survey"},   {Stage::done, "done"},
};
constexpr std::pair<ViolationCode, std::string_view> kViolations[] = {
    {ViolationCode::unknown_project, "unknown_project"},
    {ViolationCode::duplicate_project, "duplicate_project"},
    {ViolationCode::too_many_projects, "too_many_projects"},
    {ViolationCode::over_budget, "over_budget"},
    {ViolationCode::amount_exceeds_cost, "amount_exceeds_cost"},
    {ViolationCode::non_positive_amount, "non_positive_amount"},
    {ViolationCode::partial_not_allowed, "partial_not_allowed"},
    {ViolationCode::off_step_amount, "off_step_amount"},
    {ViolationCode::non_positive_tokens, "non_positive_tokens"},
    {ViolationCode::too_many_tokens, "too_many_tokens"},
};

int parse_int(std::string_view text, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string_view to_string(MethodKind kind) { return enum_name(kind, kMethodKinds); }
std::string_view to_string(RemainderPolicy policy) { return enum_name(policy, kPolicies); }
std::string_view to_string(Slot slot) { return enum_name(slot, kSlots); }
std::string_view to_string(Stage stage) { return enum_name(stage, kStages); }
std::string_view to_string(ViolationCode code) { return enum_name(code, kViolations); }

MethodKind parse_method_kind(std::string_view text) { return parse_enum(text, kMethodKinds, "method kind"); }
RemainderPolicy parse_remainder_policy(std::string_view text) { return parse_enum(text, kPolicies, "remainder policy"); }
Slot parse_slot(std::string_view text) { return parse_enum(text, kSlots, "slot"); }
Stage parse_stage(std::string_view text) { return parse_enum(text, kStages, "stage"); }

Day parse_day(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw std::invalid_argument("date must be YYYY-MM-DD (day granularity): '" + std::string(text) + "'");
  const int y = parse_int(text.substr(0, 4), "year");
  const int m = parse_int(text.substr(5, 2), "month");
  const int d = parse_int(text.substr(8, 2), "day");
  Day day{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)}, std::chrono::day{static_cast<unsigned>(d)}};
  if (!day.ok()) throw std::invalid_argument("invalid calendar date: '" + std::string(text) + "'");
  return day;
}

std::string format_day(Day day) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(day.year()), static_cast<unsigned>(day.month()),
                static_cast<unsigned>(day.day()));
  return buf;
}

Day today() { return Day{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())}; }

std::string format_method(const MethodConfig& method) {
  std::string out(to_string(method.kind));
  if (method.k) out += ":" + std::to_string(*method.k);
  if (method.cost_step) out += "/" + std::to_string(method.cost_step->in_cents());
  if (!method.show_cost) out += "~";
  return out;
}

MethodConfig parse_method(std::string_view text) {
  MethodConfig method;
  if (!text.empty() && text.back() == '~') {
    method.show_cost = false;
    text.remove_suffix(1);
  }
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const int step = parse_int(text.substr(slash + 1), "cost step");
    if (step <= 0) throw std::invalid_argument("cost step must be positive");
    method.cost_step = Money::cents(step);
    text = text.substr(0, slash);
  }
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    method.k = parse_int(text.substr(colon + 1), "K");
    text = text.substr(0, colon);
  }
  method.kind = parse_method_kind(text);
  return method;
}

const Project* Election::find_project(std::string_view project_id) const {
  for (const auto& p : projects)
    if (p.id == project_id) return &p;
  return nullptr;
}

const Project& Election::project(std::string_view project_id) const {
  if (const auto* p = find_project(project_id)) return *p;
  throw std::out_of_range("election " + id + " has no project '" + std::string(project_id) + "'");
}

std::vector<Project> Election::ordered_projects() const {
  std::vector<Project> out = projects;
  std::sort(out.begin(), out.end(),
            [](const Project& a, const Project& b) { return std::tie(a.ordering, a.id) < std::tie(b.ordering, b.id); });
  return out;
}

std::vector<std::string> config_problems(const MethodConfig& method, const std::vector<Project>& projects) {
  std::vector<std::string> problems;
  const std::string label(to_string(method.kind));
  if (method.kind == MethodKind::knapsack) {
    if (method.k) problems.push_back("knapsack method must not set K");
  } else if (!method.k) {
    problems.push_back(label + " method requires K");
  } else if (*method.k < 1) {
    problems.push_back(label + " method requires K >= 1, got " + std::to_string(*method.k));
  }
  if (method.cost_step) {
    if (method.cost_step->is_zero()) {
      problems.push_back("cost step must be positive");
    } else {
      for (const auto& p : projects)
        if (p.cost.in_cents() % method.cost_step->in_cents() != 0)
          problems.push_back("cost step " + method.cost_step->to_string() + " does not divide cost of project " + p.id);
    }
  }
  return problems;
}

std::vector<std::string> config_problems(const Election& election) {
  std::vector<std::string> problems;
  if (election.id.empty()) problems.push_back("election id is empty");
  if (election.budget.is_zero()) problems.push_back("budget must be positive");
  std::set<ProjectId> ids;
  std::set<int> orderings;
  for (const auto& p : election.projects) {
    if (p.id.empty()) problems.push_back("project id is empty");
    if (!ids.insert(p.id).second) problems.push_back("duplicate project id " + p.id);
    if (!orderings.insert(p.ordering).second) problems.push_back("duplicate project ordering " + std::to_string(p.ordering));
    if (p.cost.is_zero()) problems.push_back("project " + p.id + " must have positive cost");
    if (p.election_id != election.id) problems.push_back("project " + p.id + " belongs to election " + p.election_id);
  }
  for (auto& p : config_problems(election.method, election.projects)) problems.push_back("primary: " + p);
  for (const auto& m : election.secondary_methods)
    for (auto& p : config_problems(m, election.projects)) problems.push_back("secondary: " + p);
  return problems;
}

void require_valid_config(const Election& election) {
  const auto problems = config_problems(election);
  if (problems.empty()) return;
  std::string msg = "invalid election configuration";
  for (const auto& p : problems) msg += "; " + p;
  throw ConfigError(msg);
}

MethodKind kind_of(const Ballot& ballot) {
  return std::visit(
      [](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ApprovalBallot>) return MethodKind::approval;
        else if constexpr (std::is_same_v<T, RankingBallot>) return MethodKind::ranking;
        else if constexpr (std::is_same_v<T, KnapsackBallot>) return MethodKind::knapsack;
        else return MethodKind::token;
      },
      ballot);
}

const MethodConfig& method_for_slot(const Election& election, Slot slot, MethodKind kind) {
  if (slot == Slot::primary) {
    if (election.method.kind == kind) return election.method;
    throw BallotKindMismatch(std::string(to_string(kind)) + " ballot submitted to " +
                             std::string(to_string(election.method.kind)) + " primary slot of election " + election.id);
  }
  for (const auto& m : election.secondary_methods)
    if (m.kind == kind) return m;
  if (election.secondary_methods.empty())
    throw BallotKindMismatch("election " + election.id + " has no secondary method configured");
  throw BallotKindMismatch(std::string(to_string(kind)) + " ballot does not match any secondary method of election " +
                           election.id);
}

namespace {

class Checker {
public:
  Checker(const Election& election, ValidationReport& report) : election_(election), report_(report) {}

  void add(ViolationCode code, std::string message, std::vector<ProjectId> projects = {}) {
    report_.violations.push_back({code, std::move(message), std::move(projects)});
  }

  // Reports unknown ids and returns the known ones.
  void check_ids(const std::vector<ProjectId>& ids, bool check_duplicates) {
    std::set<ProjectId> seen;
    for (const auto& id : ids) {
      if (!election_.find_project(id)) add(ViolationCode::unknown_project, "unknown project " + id, {id});
      if (check_duplicates && !seen.insert(id).second)
        add(ViolationCode::duplicate_project, "duplicate project " + id, {id});
    }
  }

  void check_count(std::size_t count, const MethodConfig& method, const std::vector<ProjectId>& ids) {
    if (method.k && count > static_cast<std::size_t>(*method.k))
      add(ViolationCode::too_many_projects,
          "selected " + std::to_string(count) + " projects but K is " + std::to_string(*method.k), ids);
  }

  void operator()(const ApprovalBallot& b, const MethodConfig& m) {
    check_ids(b.selected, true);
    check_count(b.selected.size(), m, b.selected);
  }

  void operator()(const RankingBallot& b, const MethodConfig& m) {
    check_ids(b.ranked, true);
    check_count(b.ranked.size(), m, b.ranked);
  }

  void operator()(const KnapsackBallot& b, const MethodConfig& m) {
    std::vector<ProjectId> ids;
    Money sum;
    for (const auto& [id, amount] : b.allocations) {
      ids.push_back(id);
      sum += amount;
      const Project* p = election_.find_project(id);
      if (!p) {
        add(ViolationCode::unknown_project, "unknown project " + id, {id});
        continue;
      }
      if (amount.is_zero()) {
        add(ViolationCode::non_positive_amount, "allocation to " + id + " must be positive", {id});
      } else if (amount > p->cost) {
        add(ViolationCode::amount_exceeds_cost,
            "allocation " + amount.to_string() + " to " + id + " exceeds its cost " + p->cost.to_string(), {id});
      } else if (amount != p->cost) {
        if (!m.cost_step) {
          add(ViolationCode::partial_not_allowed,
              "partial allocation " + amount.to_string() + " to indivisible project " + id, {id});
        } else if (amount.in_cents() % m.cost_step->in_cents() != 0) {
          add(ViolationCode::off_step_amount,
              "allocation " + amount.to_string() + " to " + id + " is not a multiple of " + m.cost_step->to_string(),
              {id});
        }
      }
    }
    if (sum > election_.budget)
      add(ViolationCode::over_budget, "total " + sum.to_string() + " exceeds budget " + election_.budget.to_string(),
          ids);
  }

  void operator()(const TokenBallot& b, const MethodConfig& m) {
    std::vector<ProjectId> ids;
    long long sum = 0;
    for (const auto& [id, count] : b.tokens) {
      ids.push_back(id);
      if (!election_.find_project(id)) add(ViolationCode::unknown_project, "unknown project " + id, {id});
      if (count <= 0) add(ViolationCode::non_positive_tokens, "token count on " + id + " must be positive", {id});
      else sum += count;
    }
    if (m.k && sum > *m.k)
      add(ViolationCode::too_many_tokens,
          "spent " + std::to_string(sum) + " tokens but K is " + std::to_string(*m.k), ids);
  }

private:
  const Election& election_;
  ValidationReport& report_;
};

}  // namespace

ValidationReport validate_ballot(const Ballot& ballot, const Election& election, const MethodConfig& method) {
  if (kind_of(ballot) != method.kind)
    throw BallotKindMismatch(std::string(to_string(kind_of(ballot))) + " ballot validated against " +
                             std::string(to_string(method.kind)) + " method");
  ValidationReport report;
  Checker checker(election, report);
  std::visit([&](const auto& b) { checker(b, method); }, ballot);
  return report;
}

ValidationReport validate_ballot(const Ballot& ballot, const Election& election, Slot slot) {
  return validate_ballot(ballot, election, method_for_slot(election, slot, kind_of(ballot)));
}

std::map<ProjectId, Money> canonical_approved_amounts(const Ballot& ballot, const Election& election) {
  std::map<ProjectId, Money> out;
  for (const auto& p : election.projects) out.emplace(p.id, Money{});
  auto approve_full = [&](const ProjectId& id) { out.at(id) = election.project(id).cost; };
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ApprovalBallot>) {
          for (const auto& id : b.selected) approve_full(id);
        } else if constexpr (std::is_same_v<T, RankingBallot>) {
          for (const auto& id : b.ranked) approve_full(id);
        } else if constexpr (std::is_same_v<T, KnapsackBallot>) {
          for (const auto& [id, amount] : b.allocations) {
            (void)election.project(id);
            out.at(id) = amount;
          }
        } else {
          for (const auto& [id, count] : b.tokens)
            if (count > 0) approve_full(id);
        }
      },
      ballot);
  return out;
}

Money total(const std::map<ProjectId, Money>& amounts) {
  Money sum;
  for (const auto& [id, amount] : amounts) sum += amount;
  return sum;
}

}  // namespace pbvote
