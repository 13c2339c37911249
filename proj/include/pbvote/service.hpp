#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbvote/dataset.hpp"
#include "pbvote/json_codec.hpp"
#include "pbvote/model.hpp"
#include "pbvote/results.hpp"

namespace pbvote::service {

// A refused request. `status` is the HTTP status the API answers with.
class ServiceError : public std::runtime_error {
public:
  ServiceError(int status, std::string code, const std::string& message, std::vector<Violation> violations = {},
               std::vector<std::string> problems = {})
      : std::runtime_error(message),
        status_(status),
        code_(std::move(code)),
        violations_(std::move(violations)),
        problems_(std::move(problems)) {}

  [[nodiscard]] int status() const noexcept { return status_; }
  [[nodiscard]] const std::string& code() const noexcept { return code_; }
  [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }
  [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  int status_;
  std::string code_;
  std::vector<Violation> violations_;
  std::vector<std::string> problems_;
};

struct CodeState {
  VoterId voter_id;
  bool primary_used = false;
  bool secondary_used = false;

  friend bool operator==(const CodeState&, const CodeState&) = default;
};

// Everything the store knows about one election.
struct ElectionState {
  Election election;
  bool open = false;
  std::uint64_t seed = 0;  // secondary assignment seed
  std::map<std::string, CodeState> codes;
  std::map<VoterId, Voter> voters;
  std::set<VoterId> voided;
  std::vector<BallotEnvelope> ballots;  // admission order

  friend bool operator==(const ElectionState&, const ElectionState&) = default;
};

struct IssuedCode {
  std::string code;
  VoterId voter_id;
};

struct SubmitReceipt {
  VoterId voter_id;
  Slot slot = Slot::primary;
  Stage stage = Stage::done;
  Day day{};
};

struct StoreOptions {
  // Without a directory the store is memory only.
  std::optional<std::filesystem::path> data_dir;
  // A snapshot is written after this many logged events; 0 disables automatic snapshots.
  std::size_t snapshot_every = 1000;
  std::function<Day()> clock = today;
  // Seeds code, voter id and election seed generation; random_device when absent.
  std::optional<std::uint64_t> entropy_seed;
};

// Index of the secondary method assigned to `voter` among `n` methods.
std::size_t assignment_index(std::uint64_t election_seed, const VoterId& voter, std::size_t n);

// Elections, issued codes, voters and the ballot log. Writes to one election are serialized;
// reads take shared locks and results are aggregated on a copy of the ballots.
// With a data directory every accepted write is appended to log.jsonl (and fsynced) before it
// takes effect; opening a store replays snapshot.json and then the log.
class ElectionStore {
public:
  explicit ElectionStore(StoreOptions options = {});
  ~ElectionStore();
  ElectionStore(const ElectionStore&) = delete;
  ElectionStore& operator=(const ElectionStore&) = delete;

  // Generates an id when config.id is empty. A seed of nullopt draws a fresh one.
  ElectionId create_election(Election config, std::optional<std::uint64_t> seed = std::nullopt);
  void add_projects(const ElectionId& id, std::vector<Project> projects);
  void open_voting(const ElectionId& id);
  std::vector<IssuedCode> issue_codes(const ElectionId& id, int count);

  SubmitReceipt submit_ballot(const ElectionId& id, const std::string& code, Slot slot, const Ballot& ballot);
  MethodConfig assign_secondary_method(const ElectionId& id, const std::string& code) const;

  // Soft flag; voided voters' ballots stay in the log but are left out of results.
  void set_voided(const ElectionId& id, const VoterId& voter, bool voided);

  ElectionResults get_results(const ElectionId& id, const std::optional<std::string>& method = std::nullopt,
                              const std::optional<RemainderPolicy>& policy = std::nullopt) const;

  [[nodiscard]] ElectionState state(const ElectionId& id) const;
  [[nodiscard]] std::vector<ElectionId> election_ids() const;
  [[nodiscard]] DatasetBundle export_election(const ElectionId& id) const;

  // Writes snapshot.json atomically; a no-op for memory-only stores.
  void write_snapshot();
  [[nodiscard]] std::uint64_t last_sequence() const;

private:
  struct Entry;
  Entry& entry(const ElectionId& id) const;
  void maybe_snapshot();
  // Live writes pass the state they hold a lock on; replay looks the election up.
  void persist_and_apply(const Json& event, ElectionState* target = nullptr);
  void apply(const Json& event, ElectionState* target = nullptr);
  void replay();
  std::uint64_t next_random();

  StoreOptions options_;
  mutable std::shared_mutex elections_mutex_;
  std::map<ElectionId, std::unique_ptr<Entry>> elections_;
  mutable std::mutex log_mutex_;
  std::FILE* log_ = nullptr;
  std::uint64_t sequence_ = 0;
  std::uint64_t snapshot_sequence_ = 0;
  std::mutex rng_mutex_;
  std::uint64_t rng_state_ = 0;
};

}  // namespace pbvote::service
