#include "pbvote/api.hpp"

#include <httplib.h>

#include <sstream>

namespace pbvote::service {

namespace {

ApiResponse error(int status, const std::string& code, const std::string& message) {
  return {status, Json{{"error", code}, {"message", message}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::istringstream in(path);
  std::string part;
  while (std::getline(in, part, '/'))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  return Json::parse(body);
}

Json election_view(const ElectionState& s) {
  std::size_t primaries = 0, secondaries = 0;
  for (const auto& b : s.ballots) ++(b.slot == Slot::primary ? primaries : secondaries);
  return Json{{"election", s.election},
              {"open", s.open},
              {"codes_issued", s.codes.size()},
              {"primary_ballots", primaries},
              {"secondary_ballots", secondaries},
              {"voided", s.voided}};
}

std::optional<std::string> query_param(const ApiRequest& r, const std::string& key) {
  const auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

}  // namespace

ApiResponse Api::handle(const ApiRequest& request) const {
  try {
    const auto parts = split_path(request.path);
    if (parts.size() < 2 || parts[0] != "v1" || parts[1] != "elections")
      return error(404, "not_found", "no route for " + request.path);
    const bool get = request.method == "GET";
    const bool post = request.method == "POST";

    if (parts.size() == 2) {
      if (get) return {200, Json{{"elections", store_.election_ids()}}};
      if (post) {
        const Json body = parse_body(request.body);
        std::optional<std::uint64_t> seed;
        if (body.contains("seed")) seed = body["seed"].get<std::uint64_t>();
        const auto id = store_.create_election(body.get<Election>(), seed);
        return {201, election_view(store_.state(id))};
      }
      return error(405, "method_not_allowed", request.method + " " + request.path);
    }

    const ElectionId& id = parts[2];
    if (parts.size() == 3) {
      if (get) return {200, election_view(store_.state(id))};
      return error(405, "method_not_allowed", request.method + " " + request.path);
    }
    if (parts.size() != 4) return error(404, "not_found", "no route for " + request.path);
    const std::string& action = parts[3];

    if (post && action == "projects") {
      const Json body = parse_body(request.body);
      const Json& list = body.is_array() ? body : body.at("projects");
      store_.add_projects(id, list.get<std::vector<Project>>());
      return {200, election_view(store_.state(id))};
    }
    if (post && action == "open") {
      store_.open_voting(id);
      return {200, election_view(store_.state(id))};
    }
    if (post && action == "codes") {
      const Json body = parse_body(request.body);
      Json codes = Json::array();
      for (const auto& c : store_.issue_codes(id, body.value("count", 1)))
        codes.push_back({{"code", c.code}, {"voter_id", c.voter_id}});
      return {201, Json{{"codes", codes}}};
    }
    if (post && action == "ballots") {
      const Json body = parse_body(request.body);
      const auto receipt = store_.submit_ballot(id, body.at("code").get<std::string>(),
                                                parse_slot(body.value("slot", std::string("primary"))),
                                                ballot_from_json(body.at("ballot")));
      return {201, Json{{"voter_id", receipt.voter_id},
                        {"slot", to_string(receipt.slot)},
                        {"stage", to_string(receipt.stage)},
                        {"day", format_day(receipt.day)}}};
    }
    if (post && action == "void") {
      const Json body = parse_body(request.body);
      store_.set_voided(id, body.at("voter_id").get<std::string>(), body.value("voided", true));
      return {200, election_view(store_.state(id))};
    }
    if (get && action == "secondary-assignment") {
      const auto code = query_param(request, "code");
      if (!code) return error(400, "missing_code", "the code query parameter is required");
      return {200, Json{{"method", store_.assign_secondary_method(id, *code)}}};
    }
    if (get && action == "results") {
      std::optional<RemainderPolicy> policy;
      if (const auto p = query_param(request, "policy")) policy = parse_remainder_policy(*p);
      return {200, Json(store_.get_results(id, query_param(request, "method"), policy))};
    }
    if (get && action == "export") {
      Json files = Json::object();
      for (const auto& [name, content] : render_bundle(store_.export_election(id))) files[name] = content;
      return {200, Json{{"files", files}}};
    }
    return error(404, "not_found", "no route for " + request.method + " " + request.path);
  } catch (const ServiceError& e) {
    ApiResponse r = error(e.status(), e.code(), e.what());
    if (!e.violations().empty()) r.body["violations"] = e.violations();
    if (!e.problems().empty()) r.body["problems"] = e.problems();
    return r;
  } catch (const Json::exception& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::out_of_range& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal_error", e.what());
  }
}

HttpServer::HttpServer(const Api& api) : server_(std::make_unique<httplib::Server>()) {
  auto handler = [&api](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) request.query[k] = v;
    const ApiResponse response = api.handle(request);
    res.status = response.status;
    res.set_content(response.body.dump(), "application/json");
  };
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server_->Get(R"(/v1/.*)", handler);
  server_->Post(R"(/v1/.*)", handler);
  server_->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

}  // namespace pbvote::service
