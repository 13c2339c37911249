#include "pbvote/service.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace pbvote::service {

namespace fs = std::filesystem;

namespace {

constexpr const char* kLogFile = "log.jsonl";
constexpr const char* kSnapshotFile = "snapshot.json";
constexpr std::string_view kCodeAlphabet = "23456789ABCDEFGHJKLMNPQRSTUVWXYZ";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json state_to_json(const ElectionState& s) {
  Json codes = Json::object();
  for (const auto& [code, c] : s.codes)
    codes[code] = {{"voter_id", c.voter_id}, {"primary_used", c.primary_used}, {"secondary_used", c.secondary_used}};
  Json voters = Json::array();
  for (const auto& [id, v] : s.voters) {
    Json j{{"id", v.id}, {"stage", to_string(v.last_stage)}, {"authentication", v.authentication}};
    if (v.last_day) j["last_day"] = format_day(*v.last_day);
    voters.push_back(std::move(j));
  }
  Json ballots = Json::array();
  for (const auto& b : s.ballots)
    ballots.push_back({{"voter_id", b.voter_id}, {"slot", to_string(b.slot)}, {"ballot", b.ballot}, {"day", format_day(b.day)}});
  return {{"election", s.election}, {"open", s.open},     {"seed", s.seed},      {"codes", codes},
          {"voters", voters},       {"voided", s.voided}, {"ballots", ballots}};
}

ElectionState state_from_json(const Json& j) {
  ElectionState s;
  s.election = j.at("election").get<Election>();
  s.open = j.at("open").get<bool>();
  s.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [code, c] : j.at("codes").items())
    s.codes[code] = {c.at("voter_id").get<std::string>(), c.at("primary_used").get<bool>(),
                     c.at("secondary_used").get<bool>()};
  for (const auto& v : j.at("voters")) {
    Voter voter;
    voter.id = v.at("id").get<std::string>();
    voter.election_id = s.election.id;
    voter.last_stage = parse_stage(v.at("stage").get<std::string>());
    voter.authentication = v.at("authentication").get<std::string>();
    if (v.contains("last_day")) voter.last_day = parse_day(v["last_day"].get<std::string>());
    s.voters[voter.id] = std::move(voter);
  }
  s.voided = j.at("voided").get<std::set<VoterId>>();
  for (const auto& b : j.at("ballots"))
    s.ballots.push_back({b.at("voter_id").get<std::string>(), s.election.id, parse_slot(b.at("slot").get<std::string>()),
                         ballot_from_json(b.at("ballot")), parse_day(b.at("day").get<std::string>())});
  return s;
}

void write_file_synced(const fs::path& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size() && std::fflush(f) == 0 &&
                  ::fsync(fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

std::size_t assignment_index(std::uint64_t election_seed, const VoterId& voter, std::size_t n) {
  if (n == 0) throw std::invalid_argument("assignment over no methods");
  return static_cast<std::size_t>(splitmix64(election_seed ^ splitmix64(fnv1a(voter))) % n);
}

struct ElectionStore::Entry {
  mutable std::shared_mutex mutex;
  ElectionState state;
};

ElectionStore::ElectionStore(StoreOptions options) : options_(std::move(options)) {
  rng_state_ = options_.entropy_seed ? *options_.entropy_seed
                                     : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  if (!options_.data_dir) return;
  std::error_code ec;
  fs::create_directories(*options_.data_dir, ec);
  if (ec) throw std::runtime_error("cannot create data directory " + options_.data_dir->string() + ": " + ec.message());
  replay();
  log_ = std::fopen((*options_.data_dir / kLogFile).c_str(), "ab");
  if (!log_) throw std::runtime_error("cannot open log in " + options_.data_dir->string());
}

ElectionStore::~ElectionStore() {
  if (log_) std::fclose(log_);
}

std::uint64_t ElectionStore::next_random() {
  std::lock_guard lock(rng_mutex_);
  rng_state_ += 0x9e3779b97f4a7c15ULL;
  return splitmix64(rng_state_);
}

ElectionStore::Entry& ElectionStore::entry(const ElectionId& id) const {
  std::shared_lock lock(elections_mutex_);
  const auto it = elections_.find(id);
  if (it == elections_.end()) throw ServiceError(404, "unknown_election", "no election " + id);
  return *it->second;
}

std::uint64_t ElectionStore::last_sequence() const {
  std::lock_guard lock(log_mutex_);
  return sequence_;
}

void ElectionStore::replay() {
  const fs::path snapshot = *options_.data_dir / kSnapshotFile;
  if (fs::exists(snapshot)) {
    std::ifstream in(snapshot);
    const Json j = Json::parse(in);
    sequence_ = snapshot_sequence_ = j.at("sequence").get<std::uint64_t>();
    for (const auto& s : j.at("elections")) {
      auto e = std::make_unique<Entry>();
      e->state = state_from_json(s);
      const auto id = e->state.election.id;
      elections_[id] = std::move(e);
    }
  }

  const fs::path log = *options_.data_dir / kLogFile;
  if (!fs::exists(log)) return;
  std::ifstream in(log, std::ios::binary);
  std::string line;
  std::uintmax_t good_bytes = 0;
  while (std::getline(in, line)) {
    const bool complete = !in.eof();
    Json event;
    try {
      if (!complete) throw std::runtime_error("torn");
      event = Json::parse(line);
    } catch (const std::exception&) {
      if (in.peek() != std::char_traits<char>::eof() && complete)
        throw std::runtime_error("corrupt event log line after sequence " + std::to_string(sequence_));
      // A torn final write: drop it so later appends start on a clean line.
      in.close();
      fs::resize_file(log, good_bytes);
      break;
    }
    good_bytes += line.size() + 1;
    const auto seq = event.at("seq").get<std::uint64_t>();
    if (seq <= snapshot_sequence_) continue;
    apply(event);
    sequence_ = seq;
  }
}

void ElectionStore::persist_and_apply(const Json& event_in, ElectionState* target) {
  Json event = event_in;
  {
    std::lock_guard lock(log_mutex_);
    event["seq"] = ++sequence_;
    if (log_) {
      const std::string line = event.dump() + "\n";
      if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0 ||
          ::fsync(fileno(log_)) != 0) {
        --sequence_;
        throw ServiceError(500, "storage_failure", "cannot append to the event log");
      }
    }
  }
  apply(event, target);
}

void ElectionStore::apply(const Json& event, ElectionState* target) {
  const auto type = event.at("type").get<std::string>();
  if (type == "create_election") {
    auto e = std::make_unique<Entry>();
    e->state.election = event.at("election").get<Election>();
    e->state.seed = event.at("seed").get<std::uint64_t>();
    const auto id = e->state.election.id;
    elections_[id] = std::move(e);
    return;
  }
  ElectionState& s = target ? *target : elections_.at(event.at("election_id").get<std::string>())->state;
  if (type == "add_projects") {
    for (auto p : event.at("projects").get<std::vector<Project>>()) s.election.projects.push_back(std::move(p));
  } else if (type == "open") {
    s.open = true;
  } else if (type == "issue_codes") {
    for (const auto& c : event.at("codes")) {
      const auto code = c.at("code").get<std::string>();
      const auto voter_id = c.at("voter_id").get<std::string>();
      s.codes[code] = CodeState{voter_id};
      Voter v;
      v.id = voter_id;
      v.election_id = s.election.id;
      v.authentication = "code";
      s.voters[voter_id] = std::move(v);
    }
  } else if (type == "ballot") {
    const auto code = event.at("code").get<std::string>();
    const Slot slot = parse_slot(event.at("slot").get<std::string>());
    const Day day = parse_day(event.at("day").get<std::string>());
    CodeState& c = s.codes.at(code);
    (slot == Slot::primary ? c.primary_used : c.secondary_used) = true;
    s.ballots.push_back({c.voter_id, s.election.id, slot, ballot_from_json(event.at("ballot")), day});
    Voter& v = s.voters.at(c.voter_id);
    v.last_stage = parse_stage(event.at("stage").get<std::string>());
    v.last_day = day;
  } else if (type == "void") {
    const auto voter = event.at("voter_id").get<std::string>();
    if (event.at("voided").get<bool>()) s.voided.insert(voter);
    else s.voided.erase(voter);
  } else {
    throw std::runtime_error("unknown event type " + type);
  }
}

void ElectionStore::maybe_snapshot() {
  if (!options_.data_dir || options_.snapshot_every == 0) return;
  {
    std::lock_guard lock(log_mutex_);
    if (sequence_ - snapshot_sequence_ < options_.snapshot_every) return;
  }
  write_snapshot();
}

void ElectionStore::write_snapshot() {
  if (!options_.data_dir) return;
  std::unique_lock elections_lock(elections_mutex_);
  std::vector<std::shared_lock<std::shared_mutex>> locks;
  for (auto& [id, e] : elections_) locks.emplace_back(e->mutex);
  std::lock_guard log_lock(log_mutex_);
  Json elections = Json::array();
  for (const auto& [id, e] : elections_) elections.push_back(state_to_json(e->state));
  const Json snapshot{{"sequence", sequence_}, {"elections", elections}};
  const fs::path tmp = *options_.data_dir / (std::string(kSnapshotFile) + ".tmp");
  write_file_synced(tmp, snapshot.dump());
  fs::rename(tmp, *options_.data_dir / kSnapshotFile);
  snapshot_sequence_ = sequence_;
}

ElectionId ElectionStore::create_election(Election config, std::optional<std::uint64_t> seed) {
  {
    std::unique_lock lock(elections_mutex_);
    if (config.id.empty()) {
      do {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(next_random()));
        config.id = "e-" + std::string(buf).substr(0, 10);
      } while (elections_.contains(config.id));
    } else if (elections_.contains(config.id)) {
      throw ServiceError(409, "duplicate_election", "election " + config.id + " already exists");
    }
    int next_ordering = 1;
    for (auto& p : config.projects) {
      p.election_id = config.id;
      if (p.ordering == 0) p.ordering = next_ordering;
      next_ordering = std::max(next_ordering, p.ordering + 1);
    }
    if (const auto problems = config_problems(config); !problems.empty())
      throw ServiceError(400, "invalid_config", "invalid election configuration", {}, problems);
    persist_and_apply({{"type", "create_election"}, {"election", config}, {"seed", seed.value_or(next_random())}});
  }
  maybe_snapshot();
  return config.id;
}

void ElectionStore::add_projects(const ElectionId& id, std::vector<Project> projects) {
  {
    Entry& e = entry(id);
    std::unique_lock lock(e.mutex);
    if (e.state.open) throw ServiceError(409, "election_open", "projects cannot change once voting has opened");
    Election candidate = e.state.election;
    int next_ordering = 1;
    for (const auto& p : candidate.projects) next_ordering = std::max(next_ordering, p.ordering + 1);
    for (auto& p : projects) {
      p.election_id = id;
      if (p.ordering == 0) p.ordering = next_ordering;
      next_ordering = std::max(next_ordering, p.ordering + 1);
      candidate.projects.push_back(p);
    }
    if (const auto problems = config_problems(candidate); !problems.empty())
      throw ServiceError(400, "invalid_config", "invalid project list", {}, problems);
    persist_and_apply({{"type", "add_projects"}, {"election_id", id}, {"projects", projects}}, &e.state);
  }
  maybe_snapshot();
}

void ElectionStore::open_voting(const ElectionId& id) {
  {
    Entry& e = entry(id);
    std::unique_lock lock(e.mutex);
    if (e.state.open) throw ServiceError(409, "election_open", "election " + id + " is already open");
    if (e.state.election.projects.empty())
      throw ServiceError(409, "no_projects", "election " + id + " has no projects");
    persist_and_apply({{"type", "open"}, {"election_id", id}}, &e.state);
  }
  maybe_snapshot();
}

std::vector<IssuedCode> ElectionStore::issue_codes(const ElectionId& id, int count) {
  if (count < 1 || count > 100000) throw ServiceError(400, "invalid_count", "count must lie in [1, 100000]");
  std::vector<IssuedCode> issued;
  {
    Entry& e = entry(id);
    std::unique_lock lock(e.mutex);
    std::set<std::string> fresh_codes, fresh_voters;
    Json codes = Json::array();
    while (issued.size() < static_cast<std::size_t>(count)) {
      std::uint64_t r = next_random();
      std::string code;
      for (int i = 0; i < 10; ++i, r /= kCodeAlphabet.size()) code.push_back(kCodeAlphabet[r % kCodeAlphabet.size()]);
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(next_random()));
      const VoterId voter = std::string(buf).substr(0, 12);
      if (e.state.codes.contains(code) || e.state.voters.contains(voter) || !fresh_codes.insert(code).second ||
          !fresh_voters.insert(voter).second)
        continue;
      issued.push_back({code, voter});
      codes.push_back({{"code", code}, {"voter_id", voter}});
    }
    persist_and_apply({{"type", "issue_codes"}, {"election_id", id}, {"codes", codes}}, &e.state);
  }
  maybe_snapshot();
  return issued;
}

SubmitReceipt ElectionStore::submit_ballot(const ElectionId& id, const std::string& code, Slot slot,
                                           const Ballot& ballot) {
  SubmitReceipt receipt;
  {
    Entry& e = entry(id);
    std::unique_lock lock(e.mutex);
    const ElectionState& s = e.state;
    if (!s.open) throw ServiceError(409, "not_open", "election " + id + " is not open for voting");
    const auto it = s.codes.find(code);
    if (it == s.codes.end()) throw ServiceError(403, "invalid_code", "unknown voting code");
    const CodeState& c = it->second;

    const MethodConfig* method = &s.election.method;
    if (slot == Slot::primary) {
      if (c.primary_used) throw ServiceError(409, "duplicate_submission", "a primary ballot was already submitted");
    } else {
      if (!c.primary_used) throw ServiceError(409, "primary_required", "the primary ballot must be submitted first");
      if (c.secondary_used) throw ServiceError(409, "duplicate_submission", "a secondary ballot was already submitted");
      if (s.election.secondary_methods.empty())
        throw ServiceError(409, "no_secondary", "election " + id + " has no secondary method");
      method = &s.election.secondary_methods[assignment_index(s.seed, c.voter_id, s.election.secondary_methods.size())];
    }
    if (kind_of(ballot) != method->kind)
      throw ServiceError(422, "kind_mismatch",
                         std::string(to_string(kind_of(ballot))) + " ballot submitted where a " +
                             std::string(to_string(method->kind)) + " ballot is expected");
    const auto report = validate_ballot(ballot, s.election, *method);
    if (!report.ok()) throw ServiceError(422, "invalid_ballot", "ballot violates the election constraints", report.violations);

    receipt.voter_id = c.voter_id;
    receipt.slot = slot;
    receipt.day = options_.clock();
    receipt.stage = slot == Slot::primary && !s.election.secondary_methods.empty() ? Stage::secondary : Stage::done;
    persist_and_apply({{"type", "ballot"},
                       {"election_id", id},
                       {"code", code},
                       {"slot", to_string(slot)},
                       {"ballot", ballot},
                       {"day", format_day(receipt.day)},
                       {"stage", to_string(receipt.stage)}},
                      &e.state);
  }
  maybe_snapshot();
  return receipt;
}

MethodConfig ElectionStore::assign_secondary_method(const ElectionId& id, const std::string& code) const {
  Entry& e = entry(id);
  std::shared_lock lock(e.mutex);
  const ElectionState& s = e.state;
  const auto it = s.codes.find(code);
  if (it == s.codes.end()) throw ServiceError(403, "invalid_code", "unknown voting code");
  if (s.election.secondary_methods.empty())
    throw ServiceError(409, "no_secondary", "election " + id + " has no secondary method");
  if (!it->second.primary_used)
    throw ServiceError(409, "primary_required", "the primary ballot must be submitted first");
  return s.election.secondary_methods[assignment_index(s.seed, it->second.voter_id, s.election.secondary_methods.size())];
}

void ElectionStore::set_voided(const ElectionId& id, const VoterId& voter, bool voided) {
  {
    Entry& e = entry(id);
    std::unique_lock lock(e.mutex);
    if (!e.state.voters.contains(voter)) throw ServiceError(404, "unknown_voter", "no voter " + voter + " in election " + id);
    persist_and_apply({{"type", "void"}, {"election_id", id}, {"voter_id", voter}, {"voided", voided}}, &e.state);
  }
  maybe_snapshot();
}

ElectionResults ElectionStore::get_results(const ElectionId& id, const std::optional<std::string>& method,
                                           const std::optional<RemainderPolicy>& policy) const {
  Election election;
  std::vector<Ballot> ballots;
  {
    Entry& e = entry(id);
    std::shared_lock lock(e.mutex);
    election = e.state.election;
    for (const auto& b : e.state.ballots)
      if (b.slot == Slot::primary && !e.state.voided.contains(b.voter_id)) ballots.push_back(b.ballot);
  }
  try {
    return compute_results(election, ballots, method, policy);
  } catch (const MethodIncompatible& ex) {
    throw ServiceError(400, "incompatible_method", ex.what());
  }
}

ElectionState ElectionStore::state(const ElectionId& id) const {
  Entry& e = entry(id);
  std::shared_lock lock(e.mutex);
  return e.state;
}

std::vector<ElectionId> ElectionStore::election_ids() const {
  std::shared_lock lock(elections_mutex_);
  std::vector<ElectionId> out;
  for (const auto& [id, e] : elections_) out.push_back(id);
  return out;
}

DatasetBundle ElectionStore::export_election(const ElectionId& id) const {
  const ElectionState s = state(id);
  DatasetBundle b;
  b.elections.push_back({s.election, "", ""});
  b.elections_rich.columns = {"open", "voided_voters"};
  std::string voided;
  for (const auto& v : s.voided) voided += (voided.empty() ? "" : "|") + v;
  b.elections_rich.rows.push_back({s.election.id, {s.open ? "true" : "false", voided}});
  for (const auto& [vid, v] : s.voters) b.voters.push_back(v);
  b.ballots = s.ballots;
  return b;
}

}  // namespace pbvote::service
