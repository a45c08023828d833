#include "detdag/service.hpp"

#include <cmath>

#include "httplib.h"

#include "detdag/render.hpp"

namespace detdag {

namespace {

// Thrown by the handlers with a ready-made status and error list.
struct RequestError {
  int status;
  json errors;
};

json error_item(std::string kind, std::string message) {
  return {{"kind", std::move(kind)}, {"message", std::move(message)}};
}

[[noreturn]] void fail(int status, std::string kind, std::string message) {
  throw RequestError{status, json::array({error_item(std::move(kind), std::move(message))})};
}

const json& field(const json& req, const char* key) {
  auto it = req.find(key);
  if (it == req.end()) fail(400, "request", std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const json& req, const char* key) {
  const json& v = field(req, key);
  if (!v.is_string()) fail(400, "request", std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

NodeSet list_field(const json& req, const char* key) {
  auto it = req.find(key);
  if (it == req.end() || it->is_null()) return {};
  if (!it->is_array()) fail(400, "request", std::string("field '") + key + "' must be an array of strings");
  NodeSet out;
  for (const auto& v : *it) {
    if (!v.is_string()) fail(400, "request", std::string("field '") + key + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

Dag parse_source(const json& req) {
  ParseResult r = parse(string_field(req, "source"));
  if (r.ok()) return std::move(*r.dag);
  bool syntax = std::any_of(r.errors.begin(), r.errors.end(),
                            [](const ParseError& e) { return e.kind == ParseError::Kind::Syntax; });
  throw RequestError{syntax ? 400 : 422, to_json(r.errors)};
}

json do_parse(const json& req) {
  Dag dag = parse_source(req);
  return {{"dag", to_json(dag)}, {"canonical", serialize(dag)}};
}

json do_dsep(const json& req) {
  Dag dag = parse_source(req);
  std::string x = string_field(req, "x");
  std::string y = string_field(req, "y");
  NodeSet given = list_field(req, "given");
  bool classic = req.contains("classic") && req["classic"].is_boolean() && req["classic"].get<bool>();
  try {
    json out = to_json(separation(dag, x, y, given, classic ? Criterion::Classic : Criterion::Deterministic));
    out["criterion"] = classic ? "classic" : "deterministic";
    out["closure"] = det_closure(dag, given);
    return out;
  } catch (const DegenerateQuery& e) {
    return {{"separated", nullptr},
            {"outcome", "degenerate"},
            {"witness", nullptr},
            {"criterion", "deterministic"},
            {"variable", e.variable()},
            {"closure", e.closure()},
            {"message", e.what()}};
  }
}

json do_classify(const json& req) {
  Dag dag = parse_source(req);
  return to_json(classify_estimand(dag, string_field(req, "exposure"), string_field(req, "outcome"),
                                   list_field(req, "adjust")));
}

json do_confounder(const json& req) {
  Dag dag = parse_source(req);
  return to_json(classify_confounder(dag, string_field(req, "exposure"), string_field(req, "outcome"),
                                     string_field(req, "candidate")));
}

json do_tautologies(const json& req) { return to_json(detect_tautologies(parse_source(req))); }

json do_render(const json& req) {
  Dag dag = parse_source(req);
  return {{"dot", to_dot(dag, list_field(req, "highlight"))}};
}

json do_simulate(const json& req, std::uint64_t default_seed) {
  Dag dag = parse_source(req);
  const json& n_field = field(req, "n");
  if (!n_field.is_number_integer() || n_field.get<long long>() < 1) fail(400, "request", "field 'n' must be a positive integer");
  auto n = static_cast<std::size_t>(n_field.get<long long>());
  if (n > kMaxSimulateRows) fail(422, "request", "n may not exceed " + std::to_string(kMaxSimulateRows));
  std::uint64_t seed = default_seed;
  if (auto it = req.find("seed"); it != req.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) fail(400, "request", "field 'seed' must be a non-negative integer");
    seed = it->get<std::uint64_t>();
  }
  Dataset ds = simulate(dag, {}, n, seed);
  const auto k = ds.columns.cols();
  json means = json::array();
  json sds = json::array();
  json corr = json::array();
  for (Eigen::Index i = 0; i < k; ++i) {
    means.push_back(ds.columns.col(i).mean());
    sds.push_back(std::sqrt(stats::variance(ds.columns.col(i))));
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < k; ++j) {
      try {
        row.push_back(stats::pearson(ds.columns.col(i), ds.columns.col(j)));
      } catch (const DegenerateColumn&) {
        row.push_back(nullptr);
      }
    }
    corr.push_back(std::move(row));
  }
  return {{"n", n}, {"seed", seed}, {"provenance", ds.provenance}, {"names", ds.names},
          {"mean", std::move(means)}, {"sd", std::move(sds)}, {"correlation", std::move(corr)}};
}

}  // namespace

ApiResponse handle_request(std::string_view method, std::string_view path, std::string_view body,
                           std::uint64_t default_seed) {
  auto error = [](int status, const json& errors) { return ApiResponse{status, {{"ok", false}, {"errors", errors}}}; };
  static const std::vector<std::string_view> endpoints = {"/api/parse",      "/api/dsep",   "/api/classify",
                                                          "/api/confounder", "/api/tautologies",
                                                          "/api/render",     "/api/simulate"};
  if (std::find(endpoints.begin(), endpoints.end(), path) == endpoints.end()) {
    return error(404, json::array({error_item("request", "no such endpoint")}));
  }
  if (method != "POST") return error(405, json::array({error_item("request", "use POST")}));
  if (body.size() > kMaxRequestBytes) {
    return error(413, json::array({error_item("request", "request exceeds 256 KiB")}));
  }
  json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) {
    return error(400, json::array({error_item("request", "body must be a JSON object")}));
  }
  try {
    json result;
    if (path == "/api/parse") result = do_parse(req);
    else if (path == "/api/dsep") result = do_dsep(req);
    else if (path == "/api/classify") result = do_classify(req);
    else if (path == "/api/confounder") result = do_confounder(req);
    else if (path == "/api/tautologies") result = do_tautologies(req);
    else if (path == "/api/render") result = do_render(req);
    else result = do_simulate(req, default_seed);
    return {200, {{"ok", true}, {"result", std::move(result)}}};
  } catch (const RequestError& e) {
    return error(e.status, e.errors);
  } catch (const UnknownNode& e) {
    return error(422, json::array({error_item("unknown_node", e.what())}));
  } catch (const DegenerateQuery& e) {
    json item = error_item("degenerate_query", e.what());
    item["variable"] = e.variable();
    item["closure"] = e.closure();
    return error(422, json::array({item}));
  } catch (const QueryError& e) {
    return error(422, json::array({error_item("query", e.what())}));
  } catch (const SimulationError& e) {
    return error(422, json::array({error_item("simulation", e.what())}));
  } catch (const DagError& e) {
    return error(422, json::array({error_item("semantic", e.what())}));
  } catch (const json::exception& e) {
    return error(400, json::array({error_item("request", e.what())}));
  }
}

bool serve(const std::string& host, int port, std::uint64_t default_seed) {
  httplib::Server server;
  server.set_payload_max_length(kMaxRequestBytes);
  auto bridge = [default_seed](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = handle_request(req.method, req.path, req.body, default_seed);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post(R"(/api/.*)", bridge);
  server.Get(R"(/api/.*)", bridge);
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 413) {
      json body = {{"ok", false}, {"errors", json::array({error_item("request", "request exceeds 256 KiB")})}};
      res.set_content(body.dump(), "application/json");
    }
  });
  return server.listen(host, port);
}

}  // namespace detdag
