#include "bnlab/service.hpp"

#include <httplib.h>

#include "bnlab/error.hpp"
#include "bnlab/outputs.hpp"

namespace bnlab::api {

namespace {

using FieldErrors = std::vector<std::pair<std::string, std::string>>;

// Thrown inside a handler to produce a 400 with field errors.
struct BadRequest {
  FieldErrors fields;
};

[[noreturn]] void bad(std::string field, std::string message) {
  throw BadRequest{{{std::move(field), std::move(message)}}};
}

std::string field_of(const std::string& message, const std::string& fallback) {
  auto colon = message.find(':');
  if (colon == std::string::npos || message.find(' ') < colon) return fallback;
  return message.substr(0, colon);
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) bad("body", "expected a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    bad("body", std::string("invalid JSON: ") + e.what());
  }
}

VarId target_of(const BayesianNetwork& net, const Json& j, const char* key = "target") {
  if (!j.contains(key)) bad(key, "required");
  if (!j.at(key).is_string()) bad(key, "expected a string");
  auto name = j.at(key).get<std::string>();
  auto v = net.dag().find(name);
  if (!v) bad(key, "unknown variable '" + name + "'");
  return *v;
}

struct ParsedEvidence {
  NamedEvidence named;
  infer::Evidence ev;
};

ParsedEvidence evidence_of(const BayesianNetwork& net, const Json& j) {
  ParsedEvidence out;
  try {
    out.named = evidence_from_json(j.value("evidence", Json::object()), "evidence");
    out.ev = infer::Evidence(net, out.named);
  } catch (const SchemaError& e) {
    bad(field_of(e.what(), "evidence"), e.what());
  } catch (const ContractError& e) {
    bad("evidence", e.what());
  }
  return out;
}

double number_field(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(key, "expected a number");
  return j.at(key).get<double>();
}

}  // namespace

InferenceService::InferenceService(ModelBundle bundle) : bundle_(std::move(bundle)) {}

ServiceResponse InferenceService::handle(const std::string& method, const std::string& path,
                                         const std::map<std::string, std::string>& query,
                                         const std::string& body) const {
  const auto& net = bundle_.network;
  static const std::map<std::string, std::string> routes{
      {"/health", "GET"}, {"/model", "GET"},     {"/scan", "GET"},   {"/query", "POST"},
      {"/mpe", "POST"},   {"/scenario", "POST"}, {"/tornado", "POST"}};
  auto route = routes.find(path);
  if (route == routes.end())
    return {404, error_payload(&bundle_, "not_found", "no endpoint " + path)};
  if (route->second != method)
    return {405, error_payload(&bundle_, "method_not_allowed", path + " expects " + route->second)};

  try {
    if (path == "/health") return {200, Json{{"config_hash", bundle_.provenance.config_hash}, {"status", "ok"}}};
    if (path == "/model") return {200, model_payload(bundle_)};
    if (path == "/scan") {
      auto it = query.find("target");
      if (it == query.end()) bad("target", "required query parameter");
      auto v = net.dag().find(it->second);
      if (!v) bad("target", "unknown variable '" + it->second + "'");
      return {200, scan_payload(bundle_, infer::evidence_scan(net, *v))};
    }

    const Json req = parse_body(body);
    if (path == "/query") {
      VarId t = target_of(net, req);
      auto ev = evidence_of(net, req);
      if (ev.ev.contains(t)) bad("target", "target is also observed");
      return {200, posterior_payload(bundle_, infer::scenario(net, t, ev.ev), ev.named)};
    }
    if (path == "/scenario") {
      std::string label;
      if (req.contains("label")) {
        if (!req.at("label").is_string()) bad("label", "expected a string");
        label = req.at("label").get<std::string>();
      }
      VarId t = target_of(net, req);
      auto ev = evidence_of(net, req);
      if (ev.ev.contains(t)) bad("target", "target is also observed");
      return {200, posterior_payload(bundle_, infer::scenario(net, t, ev.ev, label), ev.named)};
    }
    if (path == "/mpe") {
      auto ev = evidence_of(net, req);
      try {
        return {200, mpe_payload(bundle_, infer::mpe(net, ev.ev), ev.named)};
      } catch (const ImpossibleEvidence& e) {
        throw ImpossibleEvidence(e.what(), infer::impossible_culprits(net, ev.ev));
      }
    }
    // /tornado
    VarId t = target_of(net, req);
    if (!req.contains("state") || !req.at("state").is_string()) bad("state", "expected a state label");
    auto s = net.variable(t).find_state(req.at("state").get<std::string>());
    if (!s) bad("state", "unknown state '" + req.at("state").get<std::string>() + "'");
    auto ev = evidence_of(net, req);
    if (ev.ev.contains(t)) bad("target", "target is also observed");
    const double window = number_field(req, "window", sensitivity::kDefaultWindow);
    if (!(window > 0.0 && window <= 1.0)) bad("window", "must lie in (0, 1]");
    std::size_t top_k = 10;
    if (req.contains("top_k")) {
      if (!req.at("top_k").is_number_unsigned()) bad("top_k", "expected a non-negative integer");
      top_k = req.at("top_k").get<std::size_t>();
    }
    sensitivity::Event event{t, *s};
    try {
      return {200, tornado_payload(bundle_, event, ev.named, window,
                                   sensitivity::tornado(net, event, ev.ev, top_k, window))};
    } catch (const ImpossibleEvidence& e) {
      throw ImpossibleEvidence(e.what(), infer::impossible_culprits(net, ev.ev));
    }
  } catch (const BadRequest& e) {
    std::string msg = "malformed request";
    for (const auto& [f, m] : e.fields) msg += "; " + f + ": " + m;
    return {400, error_payload(&bundle_, "bad_request", msg, e.fields)};
  } catch (const ImpossibleEvidence& e) {
    return {422, error_payload(&bundle_, "impossible_evidence", e.what(), {}, e.culprits())};
  } catch (const Error& e) {
    return {400, error_payload(&bundle_, "bad_request", e.what())};
  }
}

struct HttpServer::Impl {
  const InferenceService& service;
  httplib::Server server;

  explicit Impl(const InferenceService& s) : service(s) {
    auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      auto r = service.handle(req.method, req.path, query, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json; charset=utf-8");
    };
    server.Get(R"(/.*)", adapt);
    server.Post(R"(/.*)", adapt);
    server.Put(R"(/.*)", adapt);
    server.Delete(R"(/.*)", adapt);
  }
};

HttpServer::HttpServer(const InferenceService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}
bool HttpServer::running() const { return impl_->server.is_running(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace bnlab::api
