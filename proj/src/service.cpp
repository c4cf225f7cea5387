#include "ontosearch/service.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "httplib.h"
#include "json.hpp"

namespace ontosearch {

namespace {

using nlohmann::json;

constexpr const char* kJsonContentType = "application/json; charset=utf-8";

ApiReply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump() + "\n"};
}

std::optional<int> parse_port(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void apply_params(const json& j, ScoringParams& p) {
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda_peer") p.lambda_peer = value.get<double>();
    else if (key == "dept_match_boost") p.dept_match_boost = value.get<double>();
    else if (key == "dept_mismatch_penalty") p.dept_mismatch_penalty = value.get<double>();
    else if (key == "hard_department_filter") p.hard_department_filter = value.get<bool>();
    else if (key == "threshold") p.threshold = value.get<double>();
    else if (key == "expansion_weight") p.expansion_weight = value.get<double>();
    else throw ConfigError("config file: unknown scoring parameter '" + key + "'");
  }
}

json employee_card(const Employee& e, const KnowledgeBase& kb) {
  const Department* d = kb.find_department(e.department_id);
  return {{"employee_id", e.id},
          {"full_name", e.full_name},
          {"phone", e.phone},
          {"email", e.email},
          {"position_title", e.position_title},
          {"department", e.department_id},
          {"department_name", d ? d->name : std::string()}};
}

}  // namespace

EnvLookup process_environment() {
  return [](const char* name) -> std::optional<std::string> {
    const char* value = std::getenv(name);
    if (!value || !*value) return std::nullopt;
    return std::string(value);
  };
}

ServiceConfig resolve_service_config(const ConfigOverrides& flags, const EnvLookup& env) {
  ServiceConfig config;

  if (flags.config_file) {
    std::ifstream in(*flags.config_file);
    if (!in) throw ConfigError("cannot open config file '" + flags.config_file->string() + "'");
    json j;
    try {
      j = json::parse(in);
      for (const auto& [key, value] : j.items()) {
        if (key == "kb") config.kb_path = value.get<std::string>();
        else if (key == "port") config.port = value.get<int>();
        else if (key == "host") config.host = value.get<std::string>();
        else if (key == "cors_allowed_origin") config.cors_allowed_origin = value.get<std::string>();
        else if (key == "params") apply_params(value, config.params);
        else throw ConfigError("config file: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + flags.config_file->string() + "': " + e.what());
    }
  }

  if (auto kb = env("ONTOSEARCH_KB")) config.kb_path = *kb;
  if (auto port = env("ONTOSEARCH_PORT")) {
    auto parsed = parse_port(*port);
    if (!parsed) throw ConfigError("ONTOSEARCH_PORT is not an integer: '" + *port + "'");
    config.port = *parsed;
  }

  if (flags.kb_path) config.kb_path = *flags.kb_path;
  if (flags.port) config.port = *flags.port;

  if (config.kb_path.empty()) throw ConfigError("no knowledge base given (--kb or ONTOSEARCH_KB)");
  if (config.port < 1 || config.port > 65535) {
    throw ConfigError("port " + std::to_string(config.port) + " outside [1, 65535]");
  }
  if (auto problems = config.params.violations(); !problems.empty()) {
    throw ConfigError("config file: " + problems.front());
  }
  return config;
}

std::string render_search_response(const SearchResponse& response, const KnowledgeBase& kb) {
  json results = json::array();
  for (const auto& r : response.results) {
    const ScoredCase& bc = r.best_case;
    results.push_back({{"employee_id", r.employee_id},
                       {"full_name", r.full_name},
                       {"phone", r.phone},
                       {"email", r.email},
                       {"position_title", r.position_title},
                       {"department", r.department_id},
                       {"score", r.score},
                       {"matched_concepts", bc.matched_concepts},
                       {"explanation", r.explanation},
                       {"best_case",
                        {{"case_id", bc.case_id},
                         {"similarity", bc.similarity},
                         {"confidence", bc.confidence},
                         {"department_modifier", bc.department_modifier},
                         {"factor", r.factor},
                         {"peers", r.peers}}}});
  }
  json trace = json::array();
  for (const auto& e : response.trace) {
    trace.push_back({{"stage", std::string(to_string(e.stage))}, {"summary", e.summary}});
  }
  json body = {{"request_id", response.request_id},
               {"results", std::move(results)},
               {"unknown_terms", response.unknown_terms},
               {"diagnostics", response.diagnostics},
               {"department_key", response.department_key ? json(*response.department_key) : json(nullptr)},
               {"trace", std::move(trace)},
               {"kb_fingerprint", kb.fingerprint()}};
  return body.dump() + "\n";
}

SearchService::SearchService(KnowledgeBase kb, ScoringParams params) : kb_(std::move(kb)), params_(params) {
  params_.validate();
}

ApiReply SearchService::search(const std::optional<std::string>& q, const std::optional<std::string>& dept,
                               const std::optional<std::string>& k) const {
  RawQuery raw;
  raw.text = q.value_or("");
  if (dept && !dept->empty()) raw.department_filter = *dept;
  if (k) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(k->data(), k->data() + k->size(), value);
    if (ec != std::errc() || ptr != k->data() + k->size() || value < 1) {
      return error_reply(400, "InvalidQuery", "k must be a positive integer");
    }
    raw.k = static_cast<std::size_t>(value);
  }

  const SearchResponse response = handle_request(kb_, raw, params_);
  if (response.error) {
    const int status = response.error->code == "UnknownDepartment" ? 404 : 400;
    const std::string code = response.error->code == "EmptyQuery" ? "InvalidQuery" : response.error->code;
    return error_reply(status, code, response.error->message);
  }
  return {200, render_search_response(response, kb_)};
}

ApiReply SearchService::departments() const {
  json list = json::array();
  for (const auto& d : kb_.departments()) list.push_back({{"id", d.id}, {"name", d.name}});
  return {200, list.dump() + "\n"};
}

ApiReply SearchService::employee(std::string_view id) const {
  const Employee* e = kb_.find_employee(id);
  if (!e) return error_reply(404, "UnknownEmployee", "unknown employee '" + std::string(id) + "'");
  return {200, employee_card(*e, kb_).dump() + "\n"};
}

ApiReply SearchService::health() const {
  return {200, json{{"status", "ok"}, {"kb_fingerprint", kb_.fingerprint()}}.dump() + "\n"};
}

struct HttpServer::Impl {
  std::shared_ptr<const SearchService> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<const SearchService> service, std::optional<std::string> cors_allowed_origin)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  httplib::Server& srv = impl_->server;
  const SearchService* svc = impl_->service.get();

  if (cors_allowed_origin) {
    srv.set_default_headers({{"Access-Control-Allow-Origin", *cors_allowed_origin}, {"Vary", "Origin"}});
  }

  auto send = [](httplib::Response& res, const ApiReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, kJsonContentType);
  };
  auto param = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
  };

  srv.Get("/api/search", [svc, send, param](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->search(param(req, "q"), param(req, "dept"), param(req, "k")));
  });
  srv.Get("/api/departments",
          [svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc->departments()); });
  srv.Get("/api/employees/:id", [svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc->employee(req.path_params.at("id")));
  });
  srv.Get("/api/health", [svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc->health()); });

  srv.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 404 ? "NotFound" : "HttpError";
    send(res, error_reply(res.status, code, "no such resource"));
  });
  srv.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, "InternalError", message));
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace ontosearch
