#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ontosearch/kb.hpp"
#include "ontosearch/orchestrator.hpp"
#include "ontosearch/reasoner.hpp"

namespace ontosearch {

inline constexpr int kDefaultPort = 8080;

struct ServiceConfig {
  std::filesystem::path kb_path;
  int port = kDefaultPort;
  std::string host = "0.0.0.0";
  ScoringParams params;
  std::optional<std::string> cors_allowed_origin;
};

/// Values given on the command line; unset members fall through to the
/// environment and then to the config file.
struct ConfigOverrides {
  std::optional<std::filesystem::path> kb_path;
  std::optional<int> port;
  std::optional<std::filesystem::path> config_file;
};

using EnvLookup = std::function<std::optional<std::string>(const char* name)>;

EnvLookup process_environment();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layers flags over ONTOSEARCH_KB / ONTOSEARCH_PORT over the JSON config
/// file. Throws ConfigError for a missing kb path, a port outside
/// [1, 65535], or a malformed config file.
ServiceConfig resolve_service_config(const ConfigOverrides& flags, const EnvLookup& env = process_environment());

/// JSON projection of a search response as served by /api/search. Trace
/// events carry stage and summary only, so equal requests render equal bytes.
std::string render_search_response(const SearchResponse& response, const KnowledgeBase& kb);

struct ApiReply {
  int status = 200;
  std::string body;
};

/// Transport-independent request handlers over an immutable knowledge base.
class SearchService {
 public:
  SearchService(KnowledgeBase kb, ScoringParams params);

  ApiReply search(const std::optional<std::string>& q, const std::optional<std::string>& dept,
                  const std::optional<std::string>& k) const;
  ApiReply departments() const;
  ApiReply employee(std::string_view id) const;
  ApiReply health() const;

  const KnowledgeBase& kb() const { return kb_; }

 private:
  KnowledgeBase kb_;
  ScoringParams params_;
};

/// HTTP/1.1 front end for SearchService.
class HttpServer {
 public:
  HttpServer(std::shared_ptr<const SearchService> service, std::optional<std::string> cors_allowed_origin);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves until stop(); returns false if the socket cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it, or -1. Serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ontosearch
