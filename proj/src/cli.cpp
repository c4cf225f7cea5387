#include "ontosearch/cli.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ontosearch/eval.hpp"
#include "ontosearch/kb.hpp"
#include "ontosearch/orchestrator.hpp"
#include "ontosearch/service.hpp"

namespace ontosearch {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::filesystem::path resolve_kb(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (auto env = process_environment()("ONTOSEARCH_KB")) return *env;
  throw UsageError("--kb is required (or set ONTOSEARCH_KB)");
}

void print_table(std::ostream& out, const SearchResponse& response) {
  if (response.department_key) out << "department: " << *response.department_key << '\n';
  if (response.results.empty()) {
    out << "no matching employees\n";
  } else {
    out << std::left << std::setw(4) << "#" << std::setw(8) << "score" << std::setw(24) << "name"
        << std::setw(30) << "position" << std::setw(18) << "phone" << "email\n";
    std::size_t rank = 0;
    for (const auto& r : response.results) {
      std::ostringstream score;
      score << std::fixed << std::setprecision(4) << r.score;
      out << std::left << std::setw(4) << ++rank << std::setw(8) << score.str() << std::setw(24) << r.full_name
          << std::setw(30) << r.position_title << std::setw(18) << r.phone << r.email << '\n';
    }
  }
  for (const auto& d : response.diagnostics) out << "note: " << d << '\n';
}

HttpServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic employee search over a case-based knowledge base", "ontosearch"};
  app.require_subcommand(1);

  std::optional<std::string> kb_flag;

  auto* validate = app.add_subcommand("validate", "Check a knowledge base file and report every violation");
  validate->add_option("--kb", kb_flag, "Knowledge base JSON file");

  std::string query_text;
  std::optional<std::string> dept;
  std::size_t k = kDefaultResultLimit;
  bool as_json = false;
  auto* search_cmd = app.add_subcommand("search", "Run one free-text query");
  search_cmd->add_option("--kb", kb_flag, "Knowledge base JSON file");
  search_cmd->add_option("--query", query_text, "Free-text question")->required();
  search_cmd->add_option("--dept", dept, "Restrict ranking to a department id");
  search_cmd->add_option("--k", k, "Maximum number of results")->check(CLI::PositiveNumber);
  search_cmd->add_flag("--json", as_json, "Print the API JSON response");

  std::optional<int> port;
  std::optional<std::string> config_file;
  auto* serve = app.add_subcommand("serve", "Start the HTTP search service");
  serve->add_option("--kb", kb_flag, "Knowledge base JSON file");
  serve->add_option("--port", port, "TCP port (default 8080)");
  serve->add_option("--config", config_file, "JSON service configuration file");

  std::string corpus_path;
  std::string out_path;
  std::string format = "json";
  std::string averaging = "micro";
  std::size_t eval_k = kDefaultResultLimit;
  std::size_t threads = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Measure precision, recall and F-measure over a labeled corpus");
  eval_cmd->add_option("--kb", kb_flag, "Knowledge base JSON file");
  eval_cmd->add_option("--corpus", corpus_path, "JSON-lines query corpus")->required();
  eval_cmd->add_option("--out", out_path, "Report output path, or - for stdout")->required();
  eval_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  eval_cmd->add_option("--averaging", averaging, "Averaging used for CSV metrics")
      ->check(CLI::IsMember({"micro", "macro"}));
  eval_cmd->add_option("--k", eval_k, "Default result cutoff")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*validate) {
      const std::filesystem::path path = resolve_kb(kb_flag);
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        err << "cannot open '" << path.string() << "'\n";
        return kExitFailure;
      }
      std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
      const auto violations = validate_kb(parse_kb_document(text));
      for (const auto& v : violations) err << to_string(v) << '\n';
      if (!violations.empty()) return kExitFailure;
      out << "ok: " << path.string() << '\n';
      return kExitOk;
    }

    if (*search_cmd) {
      const KnowledgeBase kb = load_kb_file(resolve_kb(kb_flag));
      const ScoringParams params;
      const SearchResponse response = handle_request(kb, RawQuery{query_text, dept, k}, params);
      if (response.error) {
        err << "error: " << response.error->message << "\n\n" << search_cmd->help();
        return kExitUsage;
      }
      if (as_json) out << render_search_response(response, kb);
      else print_table(out, response);
      return kExitOk;
    }

    if (*serve) {
      ConfigOverrides overrides;
      if (kb_flag) overrides.kb_path = *kb_flag;
      overrides.port = port;
      if (config_file) overrides.config_file = *config_file;
      ServiceConfig config;
      try {
        config = resolve_service_config(overrides);
      } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
      }
      auto service = std::make_shared<const SearchService>(load_kb_file(config.kb_path), config.params);
      HttpServer server(service, config.cors_allowed_origin);
      g_server = &server;
      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      out << "serving " << config.kb_path.string() << " on " << config.host << ':' << config.port << std::endl;
      const bool ok = server.listen(config.host, config.port);
      g_server = nullptr;
      if (!ok) {
        err << "error: cannot listen on " << config.host << ':' << config.port << '\n';
        return kExitFailure;
      }
      return kExitOk;
    }

    if (*eval_cmd) {
      const KnowledgeBase kb = load_kb_file(resolve_kb(kb_flag));
      const auto corpus = load_corpus_file(corpus_path);
      const MetricsReport report = run_eval(kb, corpus, ScoringParams{}, eval_k, threads);
      const std::string body =
          emit_report(report, format == "csv" ? ReportFormat::Csv : ReportFormat::Json,
                      averaging == "macro" ? Averaging::Macro : Averaging::Micro);
      if (out_path == "-") {
        out << body;
        return kExitOk;
      }
      std::ofstream file(out_path, std::ios::binary);
      if (!file || !(file << body)) {
        err << "error: cannot write '" << out_path << "'\n";
        return kExitFailure;
      }
      out << "queries: " << report.overall.query_count << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << e.what() << '\n';
    return kExitFailure;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const CorpusError& e) {
    err << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ontosearch
