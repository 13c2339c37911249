#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbvote/analysis.hpp"
#include "pbvote/inference.hpp"
#include "pbvote/model.hpp"
#include "pbvote/regression.hpp"
#include "pbvote/synthetic.hpp"

namespace pbvote {

// File names of the tables in a dataset directory.
namespace tables {
inline constexpr const char* kElections = "elections.csv";
inline constexpr const char* kElectionsRich = "elections_rich.csv";
inline constexpr const char* kProjects = "projects.csv";
inline constexpr const char* kVoters = "voters.csv";
inline constexpr const char* kVoteApprovals = "vote_approvals.csv";
inline constexpr const char* kVoteKnapsacks = "vote_knapsacks.csv";
inline constexpr const char* kVoteRankings = "vote_rankings.csv";
inline constexpr const char* kVoteTokens = "vote_tokens.csv";
inline constexpr const char* kInferredVotes = "inferred_votes.csv";
inline constexpr const char* kVoterUtilityStats = "voter_utility_stats.csv";
}  // namespace tables

class DatasetIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A required column is missing or the header cannot be parsed.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ElectionRecord {
  Election election;  // projects attached from projects.csv
  std::string ballot_text;
  std::string remarks;

  friend bool operator==(const ElectionRecord&, const ElectionRecord&) = default;
};

// Extra per-election columns carried through unchanged.
struct RichTable {
  std::vector<std::string> columns;  // excluding election_id
  std::vector<std::pair<ElectionId, std::vector<std::string>>> rows;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
  friend bool operator==(const RichTable&, const RichTable&) = default;
};

struct InferredVoteRow {
  VoterId voter_id;
  ElectionId election_id;
  Slot slot = Slot::primary;
  InferMode mode = InferMode::skip;
  ProjectId project_id;
  Money amount;

  friend bool operator==(const InferredVoteRow&, const InferredVoteRow&) = default;
};

struct UtilityStatRow {
  VoterId voter_id;
  ElectionId election_id;
  std::string pair;  // e.g. "app/knap"
  Money u_self;
  double percentile = 0.0;
  std::optional<double> z_score;

  friend bool operator==(const UtilityStatRow&, const UtilityStatRow&) = default;
};

struct DatasetBundle {
  std::vector<ElectionRecord> elections;
  RichTable elections_rich;
  std::vector<Voter> voters;
  std::vector<BallotEnvelope> ballots;  // rows of the four vote tables, grouped per (voter, election, slot)
  std::vector<InferredVoteRow> inferred_votes;
  std::vector<UtilityStatRow> voter_utility_stats;

  [[nodiscard]] const Election* find_election(std::string_view id) const;
  [[nodiscard]] std::vector<BallotEnvelope> ballots_for(std::string_view election_id, Slot slot) const;

  // Voters holding both a primary and a secondary ballot, in voter id order.
  [[nodiscard]] std::vector<VotePair> primary_secondary_pairs(std::string_view election_id) const;

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

struct Diagnostic {
  std::string table;
  std::size_t line = 0;  // 0 when the finding is not tied to a single row
  std::string code;
  std::string message;
};

struct DiagnosticsReport {
  std::vector<Diagnostic> items;
  std::size_t quarantined_rows = 0;

  [[nodiscard]] bool clean() const noexcept { return items.empty(); }
  [[nodiscard]] std::size_t count(std::string_view code) const;
};

struct ImportResult {
  DatasetBundle bundle;
  DiagnosticsReport diagnostics;
};

// Reads every table present in `dir` (elections.csv is required). Rows that break a schema rule,
// reference unknown records, or form an invalid ballot are quarantined and reported.
// Money columns are read from *_cents columns, or from dollar columns (budget, cost, amount,
// u_self) which must have at most two decimals.
ImportResult import_bundle(const std::filesystem::path& dir);

// Writes all ten tables in canonical column and row order.
void export_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

// Canonical file contents keyed by file name, as export_bundle writes them.
std::vector<std::pair<std::string, std::string>> render_bundle(const DatasetBundle& bundle);

// Opaque ids may not embed a time of day.
bool is_opaque_id(std::string_view id);

// One row per (voter, project, mode) for every ranking ballot.
std::vector<InferredVoteRow> export_inferred_votes(const std::vector<BallotEnvelope>& rankings,
                                                   const std::vector<Election>& elections,
                                                   const std::vector<InferMode>& modes);

DatasetBundle bundle_from_population(const SyntheticPopulation& population);

// Number of projects a ballot selects (positive amounts and token counts only).
std::size_t selected_count(const Ballot& ballot);

// Numeric per-election features, one value per election in `elections`:
//   K         largest number of projects selected on any ballot (the configured K without ballots)
//   M         number of projects
//   budget    in dollars
//   n_voters  primary ballots
// followed by every rich column that parses as a number for all of them. A rich column
// replaces a derived feature of the same name.
std::vector<Feature> election_features(const DatasetBundle& bundle, const std::vector<const Election*>& elections);

}  // namespace pbvote
