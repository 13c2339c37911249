#pragma once

#include <json.hpp>

#include "pbvote/aggregation.hpp"
#include "pbvote/model.hpp"
#include "pbvote/results.hpp"

namespace pbvote {

using Json = nlohmann::json;

// Money is carried as integer cents.
void to_json(Json& j, const Money& m);
void from_json(const Json& j, Money& m);

// Methods accept either the compact text form ("approval:3") or an object
// {"kind", "k", "show_cost", "cost_step_cents"}; they are written as objects.
void to_json(Json& j, const MethodConfig& m);
void from_json(const Json& j, MethodConfig& m);

// {"id", "cost_cents", "ordering", "category", "latitude", "longitude"}
void to_json(Json& j, const Project& p);
void from_json(const Json& j, Project& p);

// {"id", "name", "budget_cents", "method", "remainder_policy", "secondary_methods", "languages", "projects"}
void to_json(Json& j, const Election& e);
void from_json(const Json& j, Election& e);

// {"kind": "approval", "selected": [...]}, {"kind": "ranking", "ranked": [...]},
// {"kind": "knapsack", "allocations": {id: cents}}, {"kind": "token", "tokens": {id: n}}
void to_json(Json& j, const Ballot& b);
Ballot ballot_from_json(const Json& j);

void to_json(Json& j, const Violation& v);
void to_json(Json& j, const ScoreVector& s);
void to_json(Json& j, const AllocationResult& a);
void to_json(Json& j, const ElectionResults& r);

}  // namespace pbvote
