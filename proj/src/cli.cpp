#include "pbvote/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "pbvote/analysis.hpp"
#include "pbvote/api.hpp"
#include "pbvote/csv.hpp"
#include "pbvote/dataset.hpp"
#include "pbvote/json_codec.hpp"
#include "pbvote/regression.hpp"
#include "pbvote/results.hpp"
#include "pbvote/service.hpp"
#include "pbvote/synthetic.hpp"

namespace pbvote::cli {

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Rows = std::vector<std::vector<std::string>>;

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

// "70" for whole dollars, "70.50" otherwise.
std::string short_dollars(Money m) {
  return m.in_cents() % 100 == 0 ? std::to_string(m.in_cents() / 100) : m.to_string();
}

std::string allocation_text(const AllocationResult& a) {
  std::string out;
  for (const auto& id : a.order) {
    const auto it = a.funded.find(id);
    if (it == a.funded.end()) continue;
    if (!out.empty()) out += ", ";
    out += id + ":" + short_dollars(it->second);
  }
  return out;
}

class Output {
public:
  Output(std::ostream& out, bool pretty) : out_(out), pretty_(pretty) {}

  void table(const std::vector<std::string>& header, const Rows& rows) {
    if (!pretty_) {
      out_ << csv::write(header, rows);
      return;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows)
      for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        out_ << (i ? "  " : "");
        if (i + 1 == r.size()) out_ << r[i];
        else out_ << std::left << std::setw(static_cast<int>(width[i])) << r[i];
      }
      out_ << "\n";
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    line(rule);
    for (const auto& r : rows) line(r);
  }

  void json(const Json& j) { out_ << (pretty_ ? j.dump(2) : j.dump()) << "\n"; }

private:
  std::ostream& out_;
  bool pretty_;
};

ImportResult load(const std::string& dir) { return import_bundle(dir); }

void report_diagnostics(const DiagnosticsReport& d, std::ostream& err) {
  for (const auto& item : d.items)
    err << item.table << ":" << item.line << ": " << item.code << ": " << item.message << "\n";
}

Json diagnostics_json(const ImportResult& r) {
  Json items = Json::array();
  std::map<std::string, std::size_t> by_code;
  for (const auto& d : r.diagnostics.items) {
    items.push_back({{"table", d.table}, {"line", d.line}, {"code", d.code}, {"message", d.message}});
    ++by_code[d.code];
  }
  const auto& b = r.bundle;
  return Json{{"elections", b.elections.size()},
              {"voters", b.voters.size()},
              {"ballots", b.ballots.size()},
              {"inferred_votes", b.inferred_votes.size()},
              {"voter_utility_stats", b.voter_utility_stats.size()},
              {"quarantined_rows", r.diagnostics.quarantined_rows},
              {"diagnostic_counts", by_code},
              {"diagnostics", items}};
}

std::vector<const Election*> select_elections(const DatasetBundle& b, const std::string& election) {
  std::vector<const Election*> out;
  for (const auto& rec : b.elections)
    if (election.empty() || rec.election.id == election) out.push_back(&rec.election);
  if (!election.empty() && out.empty()) throw UsageError("no election " + election + " in the dataset");
  return out;
}

std::string pair_label(const std::vector<VotePair>& pairs) {
  if (pairs.empty()) return "";
  return std::string(to_string(kind_of(pairs.front().first))) + "/" +
         std::string(to_string(kind_of(pairs.front().second)));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

const Feature& find_feature(const std::vector<Feature>& features, const std::string& name) {
  for (const auto& f : features)
    if (f.name == name) return f;
  throw UsageError("unknown feature '" + name + "'");
}

service::HttpServer* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Participatory budgeting election engine"};
  app.set_config("--config", "", "Optional key=value configuration file; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  bool pretty = false;
  std::string output_file;
  app.add_flag("--pretty", pretty, "Human-readable tables instead of CSV / compact JSON");
  app.add_option("-o,--output", output_file, "Write results to this file instead of stdout");

  std::string data_dir, election_id, method, policy_text, mode_text, addr = "127.0.0.1:8080", params_file, out_dir,
                                                                       from_dir, store_dir;
  std::uint64_t seed = 0;
  int n_sim = 1000;
  bool summary = false;
  std::string y_name, x_names, columns;

  auto* import_cmd = app.add_subcommand("import", "Import a dataset directory and report diagnostics");
  import_cmd->add_option("dir", data_dir, "Dataset directory")->required();
  import_cmd->add_option("--out", out_dir, "Write the clean bundle here in canonical form");

  auto* export_cmd = app.add_subcommand("export", "Write a dataset directory");
  export_cmd->add_option("dir", out_dir, "Target directory")->required();
  auto* from_opt = export_cmd->add_option("--from", from_dir, "Dataset directory to re-export canonically");
  auto* store_opt = export_cmd->add_option("--data-dir", store_dir, "Service data directory to export");
  from_opt->excludes(store_opt);

  auto* validate_cmd = app.add_subcommand("validate", "Check a dataset directory; exit 1 on any finding");
  validate_cmd->add_option("dir", data_dir, "Dataset directory")->required();

  auto* infer_cmd = app.add_subcommand("infer", "Infer knapsack ballots from ranking ballots");
  infer_cmd->add_option("--mode", mode_text, "partial or skip")->required()->check(CLI::IsMember({"partial", "skip"}));
  infer_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  infer_cmd->add_option("--election", election_id, "Restrict to one election");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "Aggregate primary ballots into scores and an allocation");
  aggregate_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  aggregate_cmd->add_option("--election", election_id, "Restrict to one election");
  aggregate_cmd->add_option("--method", method, "Aggregation method (default depends on the ballot kind)");
  aggregate_cmd->add_option("--policy", policy_text, "partial, skip or leave (default: the election's)")
      ->check(CLI::IsMember({"partial", "skip", "leave"}));

  auto* analyze_cmd = app.add_subcommand("analyze", "Compare primary and secondary ballots");
  std::string analysis;
  analyze_cmd->add_option("analysis", analysis, "overlap, cost, netshift, correlate or regress")
      ->required()
      ->check(CLI::IsMember({"overlap", "cost", "netshift", "correlate", "regress"}));
  analyze_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  analyze_cmd->add_option("--election", election_id, "Restrict to one election");
  analyze_cmd->add_option("--seed", seed, "Bootstrap seed (cost)");
  analyze_cmd->add_option("--n-sim", n_sim, "Bootstrap resamples (cost)")->check(CLI::Range(100, 1000000));
  analyze_cmd->add_flag("--summary", summary, "Summary rows instead of per-voter rows (overlap)");
  analyze_cmd->add_option("--columns", columns, "Comma-separated features (correlate)");
  analyze_cmd->add_option("--y", y_name, "Response feature (regress)");
  analyze_cmd->add_option("--x", x_names, "Comma-separated predictor features (regress)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate_cmd->add_option("--seed", seed, "Random seed")->required();
  simulate_cmd->add_option("--params", params_file, "Model file of key=value lines");
  simulate_cmd->add_option("--out", out_dir, "Target directory")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Serve the /v1 HTTP API");
  serve_cmd->add_option("--addr", addr, "host:port to listen on");
  serve_cmd->add_option("--data-dir", store_dir, "Directory for the event log and snapshots")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  std::ofstream file;
  if (!output_file.empty()) {
    file.open(output_file, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write " << output_file << "\n";
      return kUsageError;
    }
  }
  Output o(output_file.empty() ? out : file, pretty);

  try {
    if (*import_cmd) {
      const auto r = load(data_dir);
      report_diagnostics(r.diagnostics, err);
      if (!out_dir.empty()) export_bundle(r.bundle, out_dir);
      o.json(diagnostics_json(r));
      return kSuccess;
    }

    if (*validate_cmd) {
      const auto r = load(data_dir);
      report_diagnostics(r.diagnostics, err);
      o.json(diagnostics_json(r));
      return r.diagnostics.clean() ? kSuccess : kValidationFailure;
    }

    if (*export_cmd) {
      DatasetBundle bundle;
      if (!from_dir.empty()) {
        const auto r = load(from_dir);
        report_diagnostics(r.diagnostics, err);
        bundle = r.bundle;
      } else if (!store_dir.empty()) {
        service::StoreOptions options;
        options.data_dir = store_dir;
        options.snapshot_every = 0;
        service::ElectionStore store(options);
        for (const auto& id : store.election_ids()) {
          auto part = store.export_election(id);
          bundle.elections.insert(bundle.elections.end(), part.elections.begin(), part.elections.end());
          bundle.elections_rich.columns = part.elections_rich.columns;
          bundle.elections_rich.rows.insert(bundle.elections_rich.rows.end(), part.elections_rich.rows.begin(),
                                            part.elections_rich.rows.end());
          bundle.voters.insert(bundle.voters.end(), part.voters.begin(), part.voters.end());
          bundle.ballots.insert(bundle.ballots.end(), part.ballots.begin(), part.ballots.end());
        }
      } else {
        throw UsageError("export needs --from or --data-dir");
      }
      export_bundle(bundle, out_dir);
      o.json(Json{{"out", out_dir}, {"elections", bundle.elections.size()}, {"ballots", bundle.ballots.size()}});
      return kSuccess;
    }

    if (*infer_cmd) {
      const auto r = load(data_dir);
      report_diagnostics(r.diagnostics, err);
      std::vector<Election> elections;
      std::vector<BallotEnvelope> rankings;
      for (const auto* e : select_elections(r.bundle, election_id)) {
        elections.push_back(*e);
        for (const auto& b : r.bundle.ballots_for(e->id, Slot::primary))
          if (kind_of(b.ballot) == MethodKind::ranking) rankings.push_back(b);
      }
      Rows rows;
      for (const auto& row : export_inferred_votes(rankings, elections, {parse_infer_mode(mode_text)}))
        rows.push_back({row.voter_id, row.election_id, std::string(to_string(row.slot)), std::string(to_string(row.mode)),
                        row.project_id, std::to_string(row.amount.in_cents())});
      o.table({"voter_id", "election_id", "slot", "mode", "project_id", "amount_cents"}, rows);
      return kSuccess;
    }

    if (*aggregate_cmd) {
      const auto r = load(data_dir);
      report_diagnostics(r.diagnostics, err);
      std::optional<RemainderPolicy> policy;
      if (!policy_text.empty()) policy = parse_remainder_policy(policy_text);
      Json results = Json::array();
      Rows rows;
      for (const auto* e : select_elections(r.bundle, election_id)) {
        std::vector<Ballot> ballots;
        for (const auto& b : r.bundle.ballots_for(e->id, Slot::primary)) ballots.push_back(b.ballot);
        std::optional<std::string> m;
        if (!method.empty()) m = method;
        const auto res = compute_results(*e, ballots, m, policy);
        Json j = res;
        j["election_id"] = e->id;
        j["allocation_text"] = allocation_text(res.allocation);
        results.push_back(std::move(j));
        rows.push_back({e->id, res.method, std::string(to_string(res.policy)), std::to_string(res.ballots_counted),
                        allocation_text(res.allocation), short_dollars(res.allocation.remainder)});
      }
      if (pretty) o.table({"election_id", "method", "policy", "ballots", "allocation", "remainder"}, rows);
      else o.json(Json{{"results", results}});
      return kSuccess;
    }

    if (*analyze_cmd) {
      const auto r = load(data_dir);
      report_diagnostics(r.diagnostics, err);
      const auto elections = select_elections(r.bundle, election_id);

      if (analysis == "overlap") {
        std::vector<ElectionOverlap> groups;
        Rows rows;
        for (const auto* e : elections) {
          const auto pairs = r.bundle.primary_secondary_pairs(e->id);
          if (pairs.size() < 2) continue;
          const auto label = pair_label(pairs);
          ElectionOverlap g{e->id, std::string(to_string(kind_of(pairs.front().first))),
                            std::string(to_string(kind_of(pairs.front().second))), overlap_stats(pairs, *e)};
          for (const auto& s : g.stats)
            rows.push_back({s.voter_id, e->id, label, std::to_string(s.u_self.in_cents()), format_number(s.percentile),
                            opt_number(s.z_score)});
          groups.push_back(std::move(g));
        }
        if (!summary) {
          o.table({"voter_id", "election_id", "pair", "u_self_cents", "percentile", "z_score"}, rows);
          return kSuccess;
        }
        Rows srows;
        for (const auto& s : election_overlap_summary(groups)) {
          srows.push_back({s.first_label, s.second_label, std::to_string(s.n_elections),
                           format_number(s.election_percentile.median), format_number(s.election_percentile.mean),
                           format_number(s.election_percentile.min), format_number(s.voter_percentile.median),
                           format_number(s.voter_percentile.mean),
                           s.voter_percentile.std_defined ? format_number(s.voter_percentile.std) : "",
                           s.election_z ? format_number(s.election_z->median) : "",
                           s.voter_z ? format_number(s.voter_z->median) : "",
                           s.voter_z ? format_number(s.voter_z->mean) : ""});
        }
        o.table({"first", "second", "n_elections", "election_pct_median", "election_pct_mean", "election_pct_min",
                 "voter_pct_median", "voter_pct_mean", "voter_pct_std", "election_z_median", "voter_z_median",
                 "voter_z_mean"},
                srows);
        return kSuccess;
      }

      if (analysis == "cost" || analysis == "netshift") {
        Rows rows;
        std::vector<std::vector<CostPair>> per_election;
        std::array<std::vector<double>, 3> pooled;
        for (const auto* e : elections) {
          const auto pairs = cost_pairs(r.bundle.primary_secondary_pairs(e->id), *e);
          if (pairs.size() < 2) continue;
          per_election.push_back(pairs);
          if (analysis == "netshift") {
            for (auto stat : kCostStatistics) {
              const auto ns = net_shift(pairs, stat);
              rows.push_back({e->id, std::string(to_string(stat)), std::to_string(ns.higher_first),
                              std::to_string(ns.higher_second), std::to_string(ns.ties),
                              std::string(to_string(ns.majority))});
            }
            continue;
          }
          const auto diff = paired_cost_diff(pairs);
          for (auto stat : kCostStatistics) {
            const auto& d = diff.diffs(stat);
            pooled[static_cast<std::size_t>(stat)].insert(pooled[static_cast<std::size_t>(stat)].end(), d.begin(), d.end());
            const auto bs = bootstrap_test(d, n_sim, seed);
            rows.push_back({e->id, std::string(to_string(stat)), std::to_string(diff.n), format_number(bs.mean_diff),
                            format_number(bs.ci95.lo), format_number(bs.ci95.hi), format_number(bs.ci99.lo),
                            format_number(bs.ci99.hi), significance_marker(bs), std::to_string(seed)});
          }
        }
        if (analysis == "netshift") {
          const auto ov = net_shift_overview(per_election);
          for (auto stat : kCostStatistics) {
            const auto i = static_cast<std::size_t>(stat);
            const int first = ov.majority_first[i], second = ov.majority_second[i];
            const auto majority = first > second ? Majority::first : second > first ? Majority::second : Majority::none;
            rows.push_back({"all", std::string(to_string(stat)), std::to_string(first), std::to_string(second),
                            std::to_string(ov.n_elections - first - second), std::string(to_string(majority))});
          }
          o.table({"election_id", "statistic", "higher_first", "higher_second", "ties", "majority"}, rows);
          return kSuccess;
        }
        for (auto stat : kCostStatistics) {
          const auto& d = pooled[static_cast<std::size_t>(stat)];
          if (d.size() < 2) continue;
          const auto bs = bootstrap_test(d, n_sim, seed);
          rows.push_back({"all", std::string(to_string(stat)), std::to_string(d.size()), format_number(bs.mean_diff),
                          format_number(bs.ci95.lo), format_number(bs.ci95.hi), format_number(bs.ci99.lo),
                          format_number(bs.ci99.hi), significance_marker(bs), std::to_string(seed)});
        }
        o.table({"election_id", "statistic", "n", "mean_diff", "ci95_lo", "ci95_hi", "ci99_lo", "ci99_hi",
                 "significance", "seed"},
                rows);
        return kSuccess;
      }

      const auto features = election_features(r.bundle, elections);
      if (analysis == "correlate") {
        std::vector<Feature> chosen;
        if (columns.empty()) chosen = features;
        else
          for (const auto& name : split_list(columns)) chosen.push_back(find_feature(features, name));
        const auto m = pearson_correlation_matrix(chosen);
        std::vector<std::string> header{"feature"};
        header.insert(header.end(), m.names.begin(), m.names.end());
        Rows rows;
        for (std::size_t i = 0; i < m.names.size(); ++i) {
          std::vector<std::string> row{m.names[i]};
          for (std::size_t j = 0; j < m.names.size(); ++j) row.push_back(opt_number(m.r[i][j]));
          rows.push_back(std::move(row));
        }
        o.table(header, rows);
        return kSuccess;
      }

      // regress
      if (y_name.empty() || x_names.empty()) throw UsageError("regress needs --y and --x");
      std::vector<Feature> xs;
      for (const auto& name : split_list(x_names)) xs.push_back(find_feature(features, name));
      const auto res = ols_regression(find_feature(features, y_name).values, xs);
      Rows rows{{"(intercept)", format_number(res.intercept), format_number(res.intercept_ci95.lo),
                 format_number(res.intercept_ci95.hi), ""}};
      for (const auto& name : res.features)
        rows.push_back({name, format_number(res.coefficients.at(name)), format_number(res.ci95.at(name).lo),
                        format_number(res.ci95.at(name).hi), format_number(res.std_errors.at(name))});
      o.table({"term", "coefficient", "ci95_lo", "ci95_hi", "std_error"}, rows);
      return kSuccess;
    }

    if (*simulate_cmd) {
      SyntheticModel model;
      if (!params_file.empty()) {
        std::ifstream in(params_file);
        if (!in) throw UsageError("cannot read " + params_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        model = parse_synthetic_model(ss.str());
      }
      const auto population = synthetic_population(seed, model);
      const auto bundle = bundle_from_population(population);
      export_bundle(bundle, out_dir);
      o.json(Json{{"seed", seed},
                  {"out", out_dir},
                  {"elections", bundle.elections.size()},
                  {"ballots", bundle.ballots.size()},
                  {"model", format_synthetic_model(model)}});
      return kSuccess;
    }

    if (*serve_cmd) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw UsageError("--addr must be host:port");
      const std::string host = addr.substr(0, colon);
      int port = 0;
      try {
        port = std::stoi(addr.substr(colon + 1));
      } catch (const std::exception&) {
        throw UsageError("invalid port in --addr " + addr);
      }
      service::StoreOptions options;
      options.data_dir = store_dir;
      service::ElectionStore store(options);
      service::Api api(store);
      service::HttpServer server(api);
      const int bound = server.bind(host, port);
      if (bound < 0) {
        err << "error: cannot listen on " << addr << "\n";
        return kValidationFailure;
      }
      err << "listening on " << host << ":" << bound << "\n";
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      server.listen();
      g_server = nullptr;
      store.write_snapshot();
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const DatasetIoError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kUsageError;
}

}  // namespace pbvote::cli
