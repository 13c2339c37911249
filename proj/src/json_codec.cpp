#include "pbvote/json_codec.hpp"

namespace pbvote {

void to_json(Json& j, const Money& m) { j = m.in_cents(); }

void from_json(const Json& j, Money& m) {
  if (!j.is_number_integer()) throw std::invalid_argument("amount must be an integer number of cents");
  m = Money::cents(j.get<std::int64_t>());
}

void to_json(Json& j, const MethodConfig& m) {
  j = Json{{"kind", to_string(m.kind)}, {"show_cost", m.show_cost}};
  if (m.k) j["k"] = *m.k;
  if (m.cost_step) j["cost_step_cents"] = *m.cost_step;
}

void from_json(const Json& j, MethodConfig& m) {
  if (j.is_string()) {
    m = parse_method(j.get<std::string>());
    return;
  }
  m = MethodConfig{};
  m.kind = parse_method_kind(j.at("kind").get<std::string>());
  if (j.contains("k") && !j["k"].is_null()) m.k = j["k"].get<int>();
  m.show_cost = j.value("show_cost", true);
  if (j.contains("cost_step_cents") && !j["cost_step_cents"].is_null()) m.cost_step = j["cost_step_cents"].get<Money>();
}

void to_json(Json& j, const Project& p) {
  j = Json{{"id", p.id}, {"election_id", p.election_id}, {"cost_cents", p.cost}, {"ordering", p.ordering}};
  if (p.category) j["category"] = *p.category;
  if (p.coordinates) {
    j["latitude"] = p.coordinates->lat;
    j["longitude"] = p.coordinates->lon;
  }
}

void from_json(const Json& j, Project& p) {
  p = Project{};
  p.id = j.at("id").get<std::string>();
  p.election_id = j.value("election_id", std::string());
  p.cost = j.at("cost_cents").get<Money>();
  p.ordering = j.value("ordering", 0);
  if (j.contains("category") && !j["category"].is_null()) p.category = j["category"].get<std::string>();
  if (j.contains("latitude") && j.contains("longitude"))
    p.coordinates = Coordinates{j["latitude"].get<double>(), j["longitude"].get<double>()};
}

void to_json(Json& j, const Election& e) {
  j = Json{{"id", e.id},
           {"name", e.name},
           {"budget_cents", e.budget},
           {"method", e.method},
           {"remainder_policy", to_string(e.remainder_policy)},
           {"secondary_methods", e.secondary_methods},
           {"languages", e.languages},
           {"projects", e.projects}};
}

void from_json(const Json& j, Election& e) {
  e = Election{};
  e.id = j.value("id", std::string());
  e.name = j.value("name", std::string());
  e.budget = j.at("budget_cents").get<Money>();
  e.method = j.at("method").get<MethodConfig>();
  if (j.contains("remainder_policy")) e.remainder_policy = parse_remainder_policy(j["remainder_policy"].get<std::string>());
  if (j.contains("secondary_methods")) e.secondary_methods = j["secondary_methods"].get<std::vector<MethodConfig>>();
  if (j.contains("languages")) e.languages = j["languages"].get<std::vector<std::string>>();
  if (j.contains("projects")) e.projects = j["projects"].get<std::vector<Project>>();
}

void to_json(Json& j, const Ballot& b) {
  std::visit(
      [&](const auto& ballot) {
        using T = std::decay_t<decltype(ballot)>;
        if constexpr (std::is_same_v<T, ApprovalBallot>) j = Json{{"kind", "approval"}, {"selected", ballot.selected}};
        else if constexpr (std::is_same_v<T, RankingBallot>) j = Json{{"kind", "ranking"}, {"ranked", ballot.ranked}};
        else if constexpr (std::is_same_v<T, KnapsackBallot>) j = Json{{"kind", "knapsack"}, {"allocations", ballot.allocations}};
        else j = Json{{"kind", "token"}, {"tokens", ballot.tokens}};
      },
      b);
}

Ballot ballot_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("ballot must be an object");
  switch (parse_method_kind(j.at("kind").get<std::string>())) {
    case MethodKind::approval: return ApprovalBallot{j.at("selected").get<std::vector<ProjectId>>()};
    case MethodKind::ranking: return RankingBallot{j.at("ranked").get<std::vector<ProjectId>>()};
    case MethodKind::knapsack: return KnapsackBallot{j.at("allocations").get<std::map<ProjectId, Money>>()};
    case MethodKind::token: return TokenBallot{j.at("tokens").get<std::map<ProjectId, int>>()};
  }
  throw std::invalid_argument("unknown ballot kind");
}

void to_json(Json& j, const Violation& v) {
  j = Json{{"code", to_string(v.code)}, {"message", v.message}, {"projects", v.projects}};
}

void to_json(Json& j, const ScoreVector& s) {
  j = Json::object();
  for (const auto& [id, half] : s.half_points) j[id] = s.score(id);
}

void to_json(Json& j, const AllocationResult& a) {
  j = Json{{"funded", a.funded},
           {"order", a.order},
           {"remainder_cents", a.remainder},
           {"total_funded_cents", a.total_funded()},
           {"policy", to_string(a.policy)}};
}

void to_json(Json& j, const ElectionResults& r) {
  j = Json{{"method", r.method},
           {"policy", to_string(r.policy)},
           {"ballots_counted", r.ballots_counted},
           {"scores", r.scores},
           {"allocation", r.allocation}};
}

}  // namespace pbvote
