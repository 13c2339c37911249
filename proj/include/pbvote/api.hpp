#pragma once

#include <map>
#include <memory>
#include <string>

#include "pbvote/json_codec.hpp"
#include "pbvote/service.hpp"

namespace httplib {
class Server;
}

namespace pbvote::service {

struct ApiRequest {
  std::string method;  // GET, POST
  std::string path;    // e.g. /v1/elections/e1/results
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

// Transport-free dispatcher for the /v1 JSON API:
//   GET  /v1/elections
//   POST /v1/elections                             election config, optional "seed"
//   GET  /v1/elections/{id}
//   POST /v1/elections/{id}/projects               {"projects": [...]} or a bare array
//   POST /v1/elections/{id}/open
//   POST /v1/elections/{id}/codes                  {"count": n}
//   POST /v1/elections/{id}/ballots                {"slot", "code", "ballot"}
//   GET  /v1/elections/{id}/secondary-assignment?code=
//   GET  /v1/elections/{id}/results?method=&policy=
//   GET  /v1/elections/{id}/export                 {"files": {name: csv text}}
//   POST /v1/elections/{id}/void                   {"voter_id", "voided": true}
// Errors answer {"error": code, "message", "violations"?, "problems"?}.
class Api {
public:
  explicit Api(ElectionStore& store) : store_(store) {}
  [[nodiscard]] ApiResponse handle(const ApiRequest& request) const;

private:
  ElectionStore& store_;
};

// cpp-httplib binding of an Api. Browser clients are allowed from any origin.
class HttpServer {
public:
  explicit HttpServer(const Api& api);
  ~HttpServer();

  // Binds to host:port (0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  bool listen();
  void stop();

private:
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace pbvote::service
