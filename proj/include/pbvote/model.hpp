#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pbvote/money.hpp"

namespace pbvote {

using ProjectId = std::string;
using VoterId = std::string;
using ElectionId = std::string;
using Day = std::chrono::year_month_day;

enum class MethodKind { approval, ranking, knapsack, token };
enum class RemainderPolicy { partial, skip, leave };
enum class Slot { primary, secondary };
enum class Stage { landing, primary, secondary, survey, done };

std::string_view to_string(MethodKind kind);
std::string_view to_string(RemainderPolicy policy);
std::string_view to_string(Slot slot);
std::string_view to_string(Stage stage);

MethodKind parse_method_kind(std::string_view text);
RemainderPolicy parse_remainder_policy(std::string_view text);
Slot parse_slot(std::string_view text);
Stage parse_stage(std::string_view text);

// "YYYY-MM-DD" only; anything finer than a day is rejected.
Day parse_day(std::string_view text);
std::string format_day(Day day);
Day today();

// Election or method configuration breaks an invariant.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A ballot was submitted against a slot configured for a different method.
class BallotKindMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct MethodConfig {
  MethodKind kind = MethodKind::approval;
  std::optional<int> k;  // K; absent for knapsack
  bool show_cost = true;
  std::optional<Money> cost_step;  // granularity of partial knapsack allocations

  friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

// Compact text form used in CSV columns and on the command line:
//   kind[:K][/step_cents][~]   e.g. "approval:4", "knapsack/500", "ranking:5~"
// A trailing '~' marks a method that hides project costs.
std::string format_method(const MethodConfig& method);
MethodConfig parse_method(std::string_view text);

struct Coordinates {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const Coordinates&, const Coordinates&) = default;
};

struct Project {
  ProjectId id;
  ElectionId election_id;
  Money cost;
  int ordering = 0;
  std::optional<std::string> category;
  std::optional<Coordinates> coordinates;

  friend bool operator==(const Project&, const Project&) = default;
};

struct Election {
  ElectionId id;
  std::string name;
  Money budget;
  MethodConfig method;
  RemainderPolicy remainder_policy = RemainderPolicy::skip;
  std::vector<MethodConfig> secondary_methods;
  std::vector<std::string> languages;  // metadata only
  std::vector<Project> projects;

  [[nodiscard]] const Project* find_project(std::string_view project_id) const;
  [[nodiscard]] const Project& project(std::string_view project_id) const;  // throws std::out_of_range
  [[nodiscard]] std::size_t num_projects() const noexcept { return projects.size(); }

  // Projects sorted by (ordering, id): the election's fixed project order.
  [[nodiscard]] std::vector<Project> ordered_projects() const;

  friend bool operator==(const Election&, const Election&) = default;
};

// Every broken configuration invariant, as human-readable lines. Empty means valid.
std::vector<std::string> config_problems(const MethodConfig& method, const std::vector<Project>& projects);
std::vector<std::string> config_problems(const Election& election);
void require_valid_config(const Election& election);

struct ApprovalBallot {
  std::vector<ProjectId> selected;
  friend bool operator==(const ApprovalBallot&, const ApprovalBallot&) = default;
};

struct RankingBallot {
  std::vector<ProjectId> ranked;  // best first; rank = position + 1
  friend bool operator==(const RankingBallot&, const RankingBallot&) = default;
};

struct KnapsackBallot {
  std::map<ProjectId, Money> allocations;
  friend bool operator==(const KnapsackBallot&, const KnapsackBallot&) = default;
};

struct TokenBallot {
  std::map<ProjectId, int> tokens;
  friend bool operator==(const TokenBallot&, const TokenBallot&) = default;
};

using Ballot = std::variant<ApprovalBallot, RankingBallot, KnapsackBallot, TokenBallot>;

MethodKind kind_of(const Ballot& ballot);

struct BallotEnvelope {
  VoterId voter_id;
  ElectionId election_id;
  Slot slot = Slot::primary;
  Ballot ballot;
  Day day{};

  friend bool operator==(const BallotEnvelope&, const BallotEnvelope&) = default;
};

struct Voter {
  VoterId id;
  ElectionId election_id;
  Stage last_stage = Stage::landing;
  std::optional<double> time_percentile;
  std::string authentication;
  std::optional<Day> last_day;

  friend bool operator==(const Voter&, const Voter&) = default;
};

enum class ViolationCode {
  unknown_project,
  duplicate_project,
  too_many_projects,
  over_budget,
  amount_exceeds_cost,
  non_positive_amount,
  partial_not_allowed,
  off_step_amount,
  non_positive_tokens,
  too_many_tokens,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string message;
  std::vector<ProjectId> projects;
};

struct ValidationReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

// Method the election configures for `slot` that accepts ballots of `kind`.
// Throws BallotKindMismatch when no such method exists.
const MethodConfig& method_for_slot(const Election& election, Slot slot, MethodKind kind);

// Checks the ballot against the method's K / cost_step and the election's projects and budget.
// Throws BallotKindMismatch if the ballot kind differs from the method kind.
ValidationReport validate_ballot(const Ballot& ballot, const Election& election, const MethodConfig& method);
ValidationReport validate_ballot(const Ballot& ballot, const Election& election, Slot slot);

// Per-project approved amount for every project in the election (zero when not approved).
// Approval, ranking and token ballots approve full project costs.
std::map<ProjectId, Money> canonical_approved_amounts(const Ballot& ballot, const Election& election);

Money total(const std::map<ProjectId, Money>& amounts);

}  // namespace pbvote
