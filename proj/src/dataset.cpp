#include "pbvote/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>
#include <type_traits>
#include <variant>

#include "pbvote/csv.hpp"

namespace pbvote {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Bundle accessors

std::optional<std::size_t> RichTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

const Election* DatasetBundle::find_election(std::string_view id) const {
  for (const auto& rec : elections)
    if (rec.election.id == id) return &rec.election;
  return nullptr;
}

std::vector<BallotEnvelope> DatasetBundle::ballots_for(std::string_view election_id, Slot slot) const {
  std::vector<BallotEnvelope> out;
  for (const auto& b : ballots)
    if (b.election_id == election_id && b.slot == slot) out.push_back(b);
  return out;
}

std::vector<VotePair> DatasetBundle::primary_secondary_pairs(std::string_view election_id) const {
  std::map<VoterId, const BallotEnvelope*> primary, secondary;
  for (const auto& b : ballots) {
    if (b.election_id != election_id) continue;
    (b.slot == Slot::primary ? primary : secondary)[b.voter_id] = &b;
  }
  std::vector<VotePair> out;
  for (const auto& [voter, p] : primary)
    if (const auto it = secondary.find(voter); it != secondary.end())
      out.push_back({voter, p->ballot, it->second->ballot});
  return out;
}

std::size_t DiagnosticsReport::count(std::string_view code) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

bool is_opaque_id(std::string_view id) {
  static const std::regex time_of_day(R"(\d{1,2}:\d{2}|\d{4}-\d{2}-\d{2}[T ]\d)");
  return !id.empty() && !std::regex_search(id.begin(), id.end(), time_of_day);
}

// ---------------------------------------------------------------------------
// Field formatting

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int64(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string day_field(const Day& d) { return d.ok() ? format_day(d) : std::string(); }
std::string cents_field(Money m) { return std::to_string(m.in_cents()); }

// ---------------------------------------------------------------------------
// Import

struct Table {
  std::string name;
  csv::Document doc;
};

std::optional<Table> read_table(const fs::path& dir, const char* name, bool required) {
  const fs::path path = dir / name;
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    if (required) throw DatasetIoError("missing required table " + path.string());
    return std::nullopt;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetIoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DatasetIoError("error reading " + path.string());
  try {
    return Table{name, csv::parse(ss.str())};
  } catch (const csv::ParseError& e) {
    throw SchemaError(std::string(name) + ": " + e.what());
  }
}

// Column access for one table, resolving canonical names and their dollar-valued aliases.
class Columns {
public:
  Columns(const Table& t, std::vector<std::string> required) : table_(t) {
    for (const auto& r : required)
      if (!t.doc.column(r)) throw SchemaError(t.name + ": missing required column '" + r + "'");
  }

  void require_money(const std::string& canonical, const std::string& dollar_alias) const {
    if (!table_.doc.column(canonical) && !table_.doc.column(dollar_alias))
      throw SchemaError(table_.name + ": missing required column '" + canonical + "' (or '" + dollar_alias + "')");
  }

  [[nodiscard]] std::string get(const csv::Record& r, std::string_view col) const {
    const auto i = table_.doc.column(col);
    return i ? r.fields[*i] : std::string();
  }

  [[nodiscard]] bool has(std::string_view col) const { return table_.doc.column(col).has_value(); }

  // Reads `<name>_cents`, falling back to the dollar column `<name>`.
  [[nodiscard]] std::optional<Money> money(const csv::Record& r, const std::string& name) const {
    if (has(name + "_cents")) {
      const auto v = get(r, name + "_cents");
      if (v.empty()) return std::nullopt;
      return Money::cents(parse_int64(v));
    }
    const auto v = get(r, name);
    if (v.empty()) return std::nullopt;
    return Money::parse_dollars(v);
  }

private:
  const Table& table_;
};

class Importer {
public:
  explicit Importer(const fs::path& dir) : dir_(dir) {}

  ImportResult run() {
    load_elections();
    load_projects();
    check_configs();
    load_rich();
    load_voters();
    load_votes();
    load_inferred();
    load_utility_stats();
    canonicalize(result_.bundle);
    return std::move(result_);
  }

  static void canonicalize(DatasetBundle& b);

private:
  void report(const std::string& table, std::size_t line, std::string code, std::string message,
              std::size_t quarantined = 1) {
    result_.diagnostics.items.push_back({table, line, std::move(code), std::move(message)});
    result_.diagnostics.quarantined_rows += quarantined;
  }

  // Runs `fn` per row; a row whose field count is wrong or whose parsing throws is quarantined.
  void for_rows(const Table& t, const std::function<void(const csv::Record&)>& fn) {
    for (const auto& rec : t.doc.records) {
      if (rec.fields.size() != t.doc.header.size()) {
        report(t.name, rec.line, "field_count",
               "expected " + std::to_string(t.doc.header.size()) + " fields, found " + std::to_string(rec.fields.size()));
        continue;
      }
      try {
        fn(rec);
      } catch (const std::exception& e) {
        report(t.name, rec.line, "bad_value", e.what());
      }
    }
  }

  Election* election(const std::string& id) {
    const auto it = election_index_.find(id);
    return it == election_index_.end() ? nullptr : &result_.bundle.elections[it->second].election;
  }

  void load_elections() {
    const auto t = read_table(dir_, tables::kElections, true);
    Columns cols(*t, {"election_id", "method"});
    cols.require_money("budget_cents", "budget");
    for_rows(*t, [&](const csv::Record& r) {
      ElectionRecord rec;
      Election& e = rec.election;
      e.id = cols.get(r, "election_id");
      if (e.id.empty()) throw std::invalid_argument("empty election_id");
      e.name = cols.get(r, "name");
      const auto budget = cols.money(r, "budget");
      if (!budget) throw std::invalid_argument("missing budget");
      e.budget = *budget;
      e.method = parse_method(cols.get(r, "method"));
      const auto policy = cols.get(r, "remainder_policy");
      e.remainder_policy = policy.empty() ? RemainderPolicy::skip : parse_remainder_policy(policy);
      for (const auto& m : split(cols.get(r, "secondary_methods"), '|')) e.secondary_methods.push_back(parse_method(m));
      e.languages = split(cols.get(r, "languages"), '|');
      rec.ballot_text = cols.get(r, "ballot_text");
      rec.remarks = cols.get(r, "remarks");
      if (election_index_.contains(e.id)) {
        report(t->name, r.line, "duplicate", "duplicate election " + e.id);
        return;
      }
      election_index_[e.id] = result_.bundle.elections.size();
      result_.bundle.elections.push_back(std::move(rec));
    });
  }

  void load_projects() {
    const auto t = read_table(dir_, tables::kProjects, false);
    if (!t) return;
    Columns cols(*t, {"project_id", "election_id", "ordering"});
    cols.require_money("cost_cents", "cost");
    for_rows(*t, [&](const csv::Record& r) {
      Project p;
      p.id = cols.get(r, "project_id");
      p.election_id = cols.get(r, "election_id");
      if (p.id.empty()) throw std::invalid_argument("empty project_id");
      const auto cost = cols.money(r, "cost");
      if (!cost) throw std::invalid_argument("missing cost");
      p.cost = *cost;
      p.ordering = static_cast<int>(parse_int64(cols.get(r, "ordering")));
      if (auto c = cols.get(r, "category_id"); !c.empty()) p.category = c;
      const auto lat = cols.get(r, "latitude"), lon = cols.get(r, "longitude");
      if (!lat.empty() || !lon.empty()) p.coordinates = Coordinates{parse_double(lat), parse_double(lon)};
      Election* e = election(p.election_id);
      if (!e) {
        report(t->name, r.line, "orphan_election", "project " + p.id + " references unknown election " + p.election_id);
        return;
      }
      if (e->find_project(p.id)) {
        report(t->name, r.line, "duplicate", "duplicate project " + p.id + " in election " + p.election_id);
        return;
      }
      if (p.cost.is_zero()) throw std::invalid_argument("project " + p.id + " has zero cost");
      e->projects.push_back(std::move(p));
    });
  }

  void check_configs() {
    for (const auto& rec : result_.bundle.elections)
      for (const auto& problem : config_problems(rec.election))
        report(tables::kElections, 0, "election_config", "election " + rec.election.id + ": " + problem, 0);
  }

  void load_rich() {
    const auto t = read_table(dir_, tables::kElectionsRich, false);
    if (!t) return;
    Columns cols(*t, {"election_id"});
    auto& rich = result_.bundle.elections_rich;
    const auto id_col = *t->doc.column("election_id");
    for (std::size_t i = 0; i < t->doc.header.size(); ++i)
      if (i != id_col) rich.columns.push_back(t->doc.header[i]);
    std::set<ElectionId> seen;
    for_rows(*t, [&](const csv::Record& r) {
      const auto id = r.fields[id_col];
      if (!election(id)) {
        report(t->name, r.line, "orphan_election", "row references unknown election " + id);
        return;
      }
      if (!seen.insert(id).second) {
        report(t->name, r.line, "duplicate", "duplicate row for election " + id);
        return;
      }
      std::vector<std::string> values;
      for (std::size_t i = 0; i < r.fields.size(); ++i)
        if (i != id_col) values.push_back(r.fields[i]);
      rich.rows.emplace_back(id, std::move(values));
    });
  }

  void load_voters() {
    const auto t = read_table(dir_, tables::kVoters, false);
    if (!t) return;
    Columns cols(*t, {"voter_id", "election_id"});
    for_rows(*t, [&](const csv::Record& r) {
      Voter v;
      v.id = cols.get(r, "voter_id");
      v.election_id = cols.get(r, "election_id");
      v.authentication = cols.get(r, "authentication");
      if (auto s = cols.get(r, "last_stage"); !s.empty()) v.last_stage = parse_stage(s);
      if (auto d = cols.get(r, "last_day"); !d.empty()) v.last_day = parse_day(d);
      if (auto tp = cols.get(r, "time_percentile"); !tp.empty()) {
        v.time_percentile = parse_double(tp);
        if (*v.time_percentile < 0.0 || *v.time_percentile > 1.0)
          throw std::invalid_argument("time_percentile " + tp + " outside [0, 1]");
      }
      if (!is_opaque_id(v.id)) {
        report(t->name, r.line, "opaque_id", "voter id '" + v.id + "' is empty or embeds a time of day");
        return;
      }
      if (!election(v.election_id)) {
        report(t->name, r.line, "orphan_election", "voter " + v.id + " references unknown election " + v.election_id);
        return;
      }
      if (!voter_keys_.insert({v.election_id, v.id}).second) {
        report(t->name, r.line, "duplicate", "duplicate voter " + v.id + " in election " + v.election_id);
        return;
      }
      result_.bundle.voters.push_back(std::move(v));
    });
  }

  struct VoteRow {
    std::size_t line;
    ProjectId project;
    std::int64_t value;  // amount in cents, rank, or tokens
    Day day;
  };
  using GroupKey = std::tuple<ElectionId, VoterId, Slot>;
  struct Group {
    MethodKind kind;
    std::string table;
    std::vector<VoteRow> rows;
  };

  void load_vote_table(const char* name, MethodKind kind, const char* value_column) {
    const auto t = read_table(dir_, name, false);
    if (!t) return;
    std::vector<std::string> required{"voter_id", "election_id", "project_id", "day"};
    if (value_column && kind != MethodKind::knapsack) required.emplace_back(value_column);
    Columns cols(*t, required);
    if (kind == MethodKind::knapsack) cols.require_money("amount_cents", "amount");
    for_rows(*t, [&](const csv::Record& r) {
      const auto voter = cols.get(r, "voter_id");
      const auto eid = cols.get(r, "election_id");
      const auto slot_text = cols.get(r, "slot");
      const Slot slot = slot_text.empty() ? Slot::primary : parse_slot(slot_text);
      VoteRow row{r.line, cols.get(r, "project_id"), 0, Day{}};
      if (auto d = cols.get(r, "day"); !d.empty()) row.day = parse_day(d);
      if (kind == MethodKind::knapsack) {
        const auto amount = cols.money(r, "amount");
        if (!amount) throw std::invalid_argument("missing amount");
        row.value = amount->in_cents();
      } else if (value_column) {
        row.value = parse_int64(cols.get(r, value_column));
      }
      const Election* e = election(eid);
      if (!e) {
        report(t->name, r.line, "orphan_election", "vote references unknown election " + eid);
        return;
      }
      if (!voter_keys_.contains({eid, voter})) {
        report(t->name, r.line, "orphan_voter", "vote references unknown voter " + voter + " in election " + eid);
        return;
      }
      if (!e->find_project(row.project)) {
        report(t->name, r.line, "orphan_project", "vote references unknown project " + row.project + " in election " + eid);
        return;
      }
      auto& groups = groups_[{eid, voter, slot}];
      auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.kind == kind; });
      if (it == groups.end()) {
        groups.push_back({kind, t->name, {}});
        it = std::prev(groups.end());
      }
      it->rows.push_back(std::move(row));
    });
  }

  void load_votes() {
    load_vote_table(tables::kVoteApprovals, MethodKind::approval, nullptr);
    load_vote_table(tables::kVoteKnapsacks, MethodKind::knapsack, "amount_cents");
    load_vote_table(tables::kVoteRankings, MethodKind::ranking, "rank");
    load_vote_table(tables::kVoteTokens, MethodKind::token, "tokens");

    for (auto& [key, groups] : groups_) {
      const auto& [eid, voter, slot] = key;
      if (groups.size() > 1) {
        for (const auto& g : groups)
          report(g.table, g.rows.front().line, "conflicting_ballots",
                 "voter " + voter + " has ballots of several kinds in the " + std::string(to_string(slot)) +
                     " slot of election " + eid,
                 g.rows.size());
        continue;
      }
      build_ballot(*election(eid), voter, slot, groups.front());
    }
  }

  void build_ballot(const Election& e, const VoterId& voter, Slot slot, Group& g) {
    auto quarantine = [&](const std::string& code, const std::string& msg) {
      report(g.table, g.rows.front().line, code, "voter " + voter + " in election " + e.id + ": " + msg, g.rows.size());
    };
    Day day{};
    for (const auto& r : g.rows)
      if (r.day.ok() && (!day.ok() || std::chrono::sys_days{r.day} > std::chrono::sys_days{day})) day = r.day;

    Ballot ballot;
    switch (g.kind) {
      case MethodKind::approval: {
        ApprovalBallot b;
        for (const auto& r : g.rows) b.selected.push_back(r.project);
        std::sort(b.selected.begin(), b.selected.end());
        ballot = std::move(b);
        break;
      }
      case MethodKind::ranking: {
        std::sort(g.rows.begin(), g.rows.end(), [](const VoteRow& a, const VoteRow& b) { return a.value < b.value; });
        RankingBallot b;
        for (std::size_t i = 0; i < g.rows.size(); ++i) {
          if (g.rows[i].value != static_cast<std::int64_t>(i) + 1) {
            quarantine("rank_sequence", "ranks are not the contiguous sequence 1.." + std::to_string(g.rows.size()));
            return;
          }
          b.ranked.push_back(g.rows[i].project);
        }
        ballot = std::move(b);
        break;
      }
      case MethodKind::knapsack: {
        KnapsackBallot b;
        for (const auto& r : g.rows) {
          if (r.value < 0) {
            quarantine("invalid_ballot", "negative allocation to " + r.project);
            return;
          }
          if (!b.allocations.emplace(r.project, Money::cents(r.value)).second) {
            quarantine("duplicate", "project " + r.project + " appears twice");
            return;
          }
        }
        ballot = std::move(b);
        break;
      }
      case MethodKind::token: {
        TokenBallot b;
        for (const auto& r : g.rows)
          if (!b.tokens.emplace(r.project, static_cast<int>(r.value)).second) {
            quarantine("duplicate", "project " + r.project + " appears twice");
            return;
          }
        ballot = std::move(b);
        break;
      }
    }

    try {
      const auto report_v = validate_ballot(ballot, e, slot);
      if (!report_v.ok()) {
        std::string msg;
        for (const auto& v : report_v.violations) msg += (msg.empty() ? "" : "; ") + v.message;
        quarantine("invalid_ballot", msg);
        return;
      }
    } catch (const BallotKindMismatch& ex) {
      quarantine("kind_mismatch", ex.what());
      return;
    }
    result_.bundle.ballots.push_back({voter, e.id, slot, std::move(ballot), day});
  }

  void load_inferred() {
    const auto t = read_table(dir_, tables::kInferredVotes, false);
    if (!t) return;
    Columns cols(*t, {"voter_id", "election_id", "mode", "project_id"});
    cols.require_money("amount_cents", "amount");
    std::set<std::tuple<ElectionId, VoterId, Slot, InferMode, ProjectId>> seen;
    for_rows(*t, [&](const csv::Record& r) {
      InferredVoteRow row;
      row.voter_id = cols.get(r, "voter_id");
      row.election_id = cols.get(r, "election_id");
      const auto slot = cols.get(r, "slot");
      row.slot = slot.empty() ? Slot::primary : parse_slot(slot);
      row.mode = parse_infer_mode(cols.get(r, "mode"));
      row.project_id = cols.get(r, "project_id");
      const auto amount = cols.money(r, "amount");
      if (!amount) throw std::invalid_argument("missing amount");
      row.amount = *amount;
      const Election* e = election(row.election_id);
      if (!e) return report(t->name, r.line, "orphan_election", "row references unknown election " + row.election_id);
      if (!voter_keys_.contains({row.election_id, row.voter_id}))
        return report(t->name, r.line, "orphan_voter", "row references unknown voter " + row.voter_id);
      const Project* p = e->find_project(row.project_id);
      if (!p) return report(t->name, r.line, "orphan_project", "row references unknown project " + row.project_id);
      if (row.amount.is_zero() || row.amount > p->cost)
        return report(t->name, r.line, "bad_value", "inferred amount outside (0, cost] for " + row.project_id);
      if (!seen.insert({row.election_id, row.voter_id, row.slot, row.mode, row.project_id}).second)
        return report(t->name, r.line, "duplicate", "duplicate inferred vote row");
      result_.bundle.inferred_votes.push_back(std::move(row));
    });
  }

  void load_utility_stats() {
    const auto t = read_table(dir_, tables::kVoterUtilityStats, false);
    if (!t) return;
    Columns cols(*t, {"voter_id", "election_id", "pair", "percentile"});
    cols.require_money("u_self_cents", "u_self");
    for_rows(*t, [&](const csv::Record& r) {
      UtilityStatRow row;
      row.voter_id = cols.get(r, "voter_id");
      row.election_id = cols.get(r, "election_id");
      row.pair = cols.get(r, "pair");
      const auto u = cols.money(r, "u_self");
      if (!u) throw std::invalid_argument("missing u_self");
      row.u_self = *u;
      row.percentile = parse_double(cols.get(r, "percentile"));
      if (row.percentile <= 0.0 || row.percentile > 1.0)
        throw std::invalid_argument("percentile outside (0, 1]");
      if (auto z = cols.get(r, "z_score"); !z.empty()) row.z_score = parse_double(z);
      if (!election(row.election_id))
        return report(t->name, r.line, "orphan_election", "row references unknown election " + row.election_id);
      if (!voter_keys_.contains({row.election_id, row.voter_id}))
        return report(t->name, r.line, "orphan_voter", "row references unknown voter " + row.voter_id);
      result_.bundle.voter_utility_stats.push_back(std::move(row));
    });
  }

  fs::path dir_;
  ImportResult result_;
  std::map<ElectionId, std::size_t> election_index_;
  std::set<std::pair<ElectionId, VoterId>> voter_keys_;
  std::map<GroupKey, std::vector<Group>> groups_;
};

void Importer::canonicalize(DatasetBundle& b) {
  std::sort(b.elections.begin(), b.elections.end(),
            [](const ElectionRecord& x, const ElectionRecord& y) { return x.election.id < y.election.id; });
  for (auto& rec : b.elections)
    std::sort(rec.election.projects.begin(), rec.election.projects.end(),
              [](const Project& x, const Project& y) { return x.id < y.id; });
  std::sort(b.elections_rich.rows.begin(), b.elections_rich.rows.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::sort(b.voters.begin(), b.voters.end(), [](const Voter& x, const Voter& y) {
    return std::tie(x.election_id, x.id) < std::tie(y.election_id, y.id);
  });
  for (auto& env : b.ballots)
    if (auto* a = std::get_if<ApprovalBallot>(&env.ballot)) std::sort(a->selected.begin(), a->selected.end());
  std::sort(b.ballots.begin(), b.ballots.end(), [](const BallotEnvelope& x, const BallotEnvelope& y) {
    return std::tie(x.election_id, x.voter_id, x.slot) < std::tie(y.election_id, y.voter_id, y.slot);
  });
  std::sort(b.inferred_votes.begin(), b.inferred_votes.end(), [&](const InferredVoteRow& x, const InferredVoteRow& y) {
    return std::tie(x.election_id, x.voter_id, x.slot, x.mode, x.project_id) <
           std::tie(y.election_id, y.voter_id, y.slot, y.mode, y.project_id);
  });
  std::sort(b.voter_utility_stats.begin(), b.voter_utility_stats.end(),
            [](const UtilityStatRow& x, const UtilityStatRow& y) {
              return std::tie(x.election_id, x.voter_id, x.pair) < std::tie(y.election_id, y.voter_id, y.pair);
            });
}

}  // namespace

ImportResult import_bundle(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DatasetIoError("not a readable directory: " + dir.string());
  return Importer(dir).run();
}

// ---------------------------------------------------------------------------
// Export

std::vector<std::pair<std::string, std::string>> render_bundle(const DatasetBundle& input) {
  DatasetBundle b = input;
  Importer::canonicalize(b);
  for (const auto& v : b.voters)
    if (!is_opaque_id(v.id)) throw DatasetIoError("voter id '" + v.id + "' is not opaque");
  for (const auto& env : b.ballots)
    if (!is_opaque_id(env.voter_id)) throw DatasetIoError("voter id '" + env.voter_id + "' is not opaque");

  std::vector<std::pair<std::string, std::string>> files;
  using Rows = std::vector<std::vector<std::string>>;

  {
    Rows rows;
    for (const auto& rec : b.elections) {
      const auto& e = rec.election;
      std::vector<std::string> secondary;
      for (const auto& m : e.secondary_methods) secondary.push_back(format_method(m));
      rows.push_back({e.id, e.name, cents_field(e.budget), format_method(e.method),
                      std::string(to_string(e.remainder_policy)), join(secondary, '|'), join(e.languages, '|'),
                      rec.ballot_text, rec.remarks});
    }
    files.emplace_back(tables::kElections,
                       csv::write({"election_id", "name", "budget_cents", "method", "remainder_policy",
                                   "secondary_methods", "languages", "ballot_text", "remarks"},
                                  rows));
  }
  {
    std::vector<std::string> header{"election_id"};
    header.insert(header.end(), b.elections_rich.columns.begin(), b.elections_rich.columns.end());
    Rows rows;
    for (const auto& [id, values] : b.elections_rich.rows) {
      std::vector<std::string> row{id};
      row.insert(row.end(), values.begin(), values.end());
      rows.push_back(std::move(row));
    }
    files.emplace_back(tables::kElectionsRich, csv::write(header, rows));
  }
  {
    Rows rows;
    for (const auto& rec : b.elections)
      for (const auto& p : rec.election.projects)
        rows.push_back({p.id, p.election_id, p.category.value_or(""), std::to_string(p.ordering), cents_field(p.cost),
                        p.coordinates ? format_double(p.coordinates->lat) : "",
                        p.coordinates ? format_double(p.coordinates->lon) : ""});
    files.emplace_back(tables::kProjects, csv::write({"project_id", "election_id", "category_id", "ordering",
                                                      "cost_cents", "latitude", "longitude"},
                                                     rows));
  }
  {
    Rows rows;
    for (const auto& v : b.voters)
      rows.push_back({v.id, v.election_id, v.authentication, std::string(to_string(v.last_stage)),
                      v.last_day ? day_field(*v.last_day) : "",
                      v.time_percentile ? format_double(*v.time_percentile) : ""});
    files.emplace_back(tables::kVoters, csv::write({"voter_id", "election_id", "authentication", "last_stage",
                                                    "last_day", "time_percentile"},
                                                   rows));
  }
  {
    Rows approvals, knapsacks, rankings, tokens;
    for (const auto& env : b.ballots) {
      const std::string slot(to_string(env.slot));
      const std::string day = day_field(env.day);
      std::visit(
          [&](const auto& ballot) {
            using T = std::decay_t<decltype(ballot)>;
            if constexpr (std::is_same_v<T, ApprovalBallot>) {
              for (const auto& id : ballot.selected) approvals.push_back({env.voter_id, env.election_id, slot, id, day});
            } else if constexpr (std::is_same_v<T, RankingBallot>) {
              for (std::size_t i = 0; i < ballot.ranked.size(); ++i)
                rankings.push_back({env.voter_id, env.election_id, slot, ballot.ranked[i], std::to_string(i + 1), day});
            } else if constexpr (std::is_same_v<T, KnapsackBallot>) {
              for (const auto& [id, amount] : ballot.allocations)
                knapsacks.push_back({env.voter_id, env.election_id, slot, id, cents_field(amount), day});
            } else {
              for (const auto& [id, n] : ballot.tokens)
                tokens.push_back({env.voter_id, env.election_id, slot, id, std::to_string(n), day});
            }
          },
          env.ballot);
    }
    files.emplace_back(tables::kVoteApprovals,
                       csv::write({"voter_id", "election_id", "slot", "project_id", "day"}, approvals));
    files.emplace_back(tables::kVoteKnapsacks,
                       csv::write({"voter_id", "election_id", "slot", "project_id", "amount_cents", "day"}, knapsacks));
    files.emplace_back(tables::kVoteRankings,
                       csv::write({"voter_id", "election_id", "slot", "project_id", "rank", "day"}, rankings));
    files.emplace_back(tables::kVoteTokens,
                       csv::write({"voter_id", "election_id", "slot", "project_id", "tokens", "day"}, tokens));
  }
  {
    Rows rows;
    for (const auto& r : b.inferred_votes)
      rows.push_back({r.voter_id, r.election_id, std::string(to_string(r.slot)), std::string(to_string(r.mode)),
                      r.project_id, cents_field(r.amount)});
    files.emplace_back(tables::kInferredVotes, csv::write({"voter_id", "election_id", "slot", "mode", "project_id",
                                                           "amount_cents"},
                                                          rows));
  }
  {
    Rows rows;
    for (const auto& r : b.voter_utility_stats)
      rows.push_back({r.voter_id, r.election_id, r.pair, cents_field(r.u_self), format_double(r.percentile),
                      r.z_score ? format_double(*r.z_score) : ""});
    files.emplace_back(tables::kVoterUtilityStats, csv::write({"voter_id", "election_id", "pair", "u_self_cents",
                                                               "percentile", "z_score"},
                                                              rows));
  }
  return files;
}

void export_bundle(const DatasetBundle& bundle, const fs::path& dir) {
  const auto files = render_bundle(bundle);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DatasetIoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, content] : files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetIoError("cannot write " + (dir / name).string());
    out << content;
    if (!out) throw DatasetIoError("error writing " + (dir / name).string());
  }
}

std::vector<InferredVoteRow> export_inferred_votes(const std::vector<BallotEnvelope>& rankings,
                                                   const std::vector<Election>& elections,
                                                   const std::vector<InferMode>& modes) {
  std::vector<InferredVoteRow> out;
  for (const auto& env : rankings) {
    const auto* ranking = std::get_if<RankingBallot>(&env.ballot);
    if (!ranking) continue;
    const auto it = std::find_if(elections.begin(), elections.end(),
                                 [&](const Election& e) { return e.id == env.election_id; });
    if (it == elections.end()) throw std::out_of_range("ranking ballot for unknown election " + env.election_id);
    for (const auto mode : modes) {
      // Rows follow the ranking order of the funded projects.
      const auto inferred = infer_knapsack(*ranking, *it, mode);
      for (const auto& id : ranking->ranked)
        if (const auto f = inferred.allocations.find(id); f != inferred.allocations.end())
          out.push_back({env.voter_id, env.election_id, env.slot, mode, id, f->second});
    }
  }
  return out;
}

DatasetBundle bundle_from_population(const SyntheticPopulation& population) {
  DatasetBundle b;
  b.elections_rich.columns = {"K", "M", "budget", "n_voters"};
  std::vector<Election> elections;
  for (const auto& se : population.elections) {
    b.elections.push_back({se.election, "", "synthetic seed " + std::to_string(population.seed)});
    elections.push_back(se.election);
    b.elections_rich.rows.push_back(
        {se.election.id,
         {std::to_string(se.election.method.k.value_or(0)), std::to_string(se.election.num_projects()),
          se.election.budget.to_string(), std::to_string(se.voters.size())}});
    b.voters.insert(b.voters.end(), se.voters.begin(), se.voters.end());
    b.ballots.insert(b.ballots.end(), se.primary.begin(), se.primary.end());
    b.ballots.insert(b.ballots.end(), se.secondary.begin(), se.secondary.end());
    auto inferred = export_inferred_votes(se.primary, elections, {InferMode::partial, InferMode::skip});
    b.inferred_votes.insert(b.inferred_votes.end(), inferred.begin(), inferred.end());
  }
  Importer::canonicalize(b);
  return b;
}

std::size_t selected_count(const Ballot& ballot) {
  return std::visit(
      [](const auto& b) -> std::size_t {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ApprovalBallot>) return b.selected.size();
        else if constexpr (std::is_same_v<T, RankingBallot>) return b.ranked.size();
        else if constexpr (std::is_same_v<T, KnapsackBallot>)
          return std::count_if(b.allocations.begin(), b.allocations.end(), [](const auto& a) { return !a.second.is_zero(); });
        else return std::count_if(b.tokens.begin(), b.tokens.end(), [](const auto& t) { return t.second > 0; });
      },
      ballot);
}

std::vector<Feature> election_features(const DatasetBundle& bundle, const std::vector<const Election*>& elections) {
  std::vector<Feature> out{{"K", {}}, {"M", {}}, {"budget", {}}, {"n_voters", {}}};
  std::map<ElectionId, std::size_t> largest;
  for (const auto& env : bundle.ballots) {
    auto& k = largest[env.election_id];
    k = std::max(k, selected_count(env.ballot));
  }
  for (const auto* e : elections) {
    const auto it = largest.find(e->id);
    out[0].values.push_back(it != largest.end() ? static_cast<double>(it->second) : e->method.k.value_or(0));
    out[1].values.push_back(static_cast<double>(e->num_projects()));
    out[2].values.push_back(static_cast<double>(e->budget.in_cents()) / 100.0);
    out[3].values.push_back(static_cast<double>(bundle.ballots_for(e->id, Slot::primary).size()));
  }
  const auto& rich = bundle.elections_rich;
  for (std::size_t c = 0; c < rich.columns.size(); ++c) {
    const auto& name = rich.columns[c];
    Feature f{name, {}};
    bool numeric = true;
    for (const auto* e : elections) {
      const auto row = std::find_if(rich.rows.begin(), rich.rows.end(), [&](const auto& r) { return r.first == e->id; });
      if (row == rich.rows.end() || c >= row->second.size()) {
        numeric = false;
        break;
      }
      const auto& text = row->second[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        numeric = false;
        break;
      }
      f.values.push_back(v);
    }
    if (!numeric) continue;
    std::erase_if(out, [&](const Feature& g) { return g.name == name; });
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace pbvote
