// Acceptance runner: one PASS/FAIL line per release criterion, non-zero exit
// if any fails. Runs without GoogleTest so the output stays one line each.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <thread>

#include "ontosearch/eval.hpp"
#include "ontosearch/orchestrator.hpp"
#include "ontosearch/service.hpp"
#include "support/instances.hpp"
#include "support/naive_search.hpp"

namespace {

using namespace ontosearch;
using json = nlohmann::json;
using testing::Generator;
using testing::Instance;

const std::string kFixtures = ONTOSEARCH_FIXTURES_DIR;

/// Thrown by a criterion to report why it failed.
struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

const KnowledgeBase& fixture() {
  static const KnowledgeBase kb = load_kb_file(kFixtures + "/acme-kb.json");
  return kb;
}

std::string check_f_identity() {
  const auto f = f_measure(0.98, 0.94);
  require(f.has_value(), "f_measure(0.98, 0.94) undefined");
  require(std::abs(*f - 0.9596) <= 0.0005, "f_measure(0.98, 0.94) = " + std::to_string(*f));
  return "f(0.98, 0.94) = " + format_metric(*f);
}

std::string check_oracle_equivalence() {
  Generator gen(0xacce97);
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const Instance in = testing::random_instance(gen);
    const auto got = search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit);
    const auto want = testing::naive_search(in.doc, in.sq, in.params, in.limit);
    const std::string at = "instance " + std::to_string(i) + ": ";
    require(got.size() == want.size(), at + "result count differs");
    for (std::size_t j = 0; j < got.size(); ++j) {
      require(got[j].employee_id == want[j].employee_id, at + "order differs at rank " + std::to_string(j));
      require(std::abs(got[j].score - want[j].score) <= 1e-9, at + "score differs at rank " + std::to_string(j));
    }
  }
  return std::to_string(n) + " random KBs";
}

std::string check_ranking_properties() {
  const int n = 1000;
  auto mutate_live = [](Generator& gen, const char* what, auto&& apply) {
    int checked = 0;
    while (checked < n) {
      Instance in = testing::random_instance(gen);
      const auto live = testing::pick_live_case(gen, in);
      if (live < 0) continue;
      const auto pos = static_cast<std::size_t>(live);
      apply(in, pos, std::string(what) + " instance " + std::to_string(checked));
      ++checked;
    }
  };
  auto rank_not_worse = [](const Instance& in, const KnowledgeBase& low, const KnowledgeBase& high,
                           const std::string& employee, const std::string& at) {
    const auto p1 = testing::position_of(search(low, in.sq, in.params, in.limit), employee);
    const auto p2 = testing::position_of(search(high, in.sq, in.params, in.limit), employee);
    if (p1 >= 0) require(p2 >= 0 && p2 <= p1, at + ": rank got worse");
  };

  Generator factor_gen(0xf0c7);
  mutate_live(factor_gen, "factor", [&](Instance& in, std::size_t pos, const std::string& at) {
    const double f1 = factor_gen.uniform_real(0.01, 0.99);
    const double f2 = factor_gen.uniform_real(f1 + 1e-6, 1.0);
    in.doc.cases[pos].factor = f1;
    const KnowledgeBase low = KnowledgeBase::from_document(in.doc);
    in.doc.cases[pos].factor = f2;
    const KnowledgeBase high = KnowledgeBase::from_document(in.doc);
    const Case& c = in.doc.cases[pos];
    require(score_case(in.sq, *high.find_case(c.id), in.params).score >
                score_case(in.sq, *low.find_case(c.id), in.params).score,
            at + ": score not strictly greater");
    rank_not_worse(in, low, high, c.employee_id, at);
  });

  Generator peer_gen(0x9e35);
  mutate_live(peer_gen, "peers", [&](Instance& in, std::size_t pos, const std::string& at) {
    const int p1 = peer_gen.uniform(0, 30);
    const int p2 = peer_gen.uniform(p1 + 1, 60);
    in.doc.cases[pos].peers = p1;
    const KnowledgeBase low = KnowledgeBase::from_document(in.doc);
    in.doc.cases[pos].peers = p2;
    const KnowledgeBase high = KnowledgeBase::from_document(in.doc);
    const Case& c = in.doc.cases[pos];
    const double s1 = score_case(in.sq, *low.find_case(c.id), in.params).score;
    const double s2 = score_case(in.sq, *high.find_case(c.id), in.params).score;
    require(in.params.lambda_peer > 0.0 ? s2 > s1 : s2 >= s1, at + ": score decreased");
    rank_not_worse(in, low, high, c.employee_id, at);
  });

  Generator perm_gen(0x9e53);
  for (int i = 0; i < n; ++i) {
    Instance in = testing::random_instance(perm_gen);
    const auto expected = search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit);
    std::shuffle(in.doc.cases.begin(), in.doc.cases.end(), perm_gen.rng());
    require(search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit) == expected,
            "permutation instance " + std::to_string(i));
  }

  Generator bound_gen(0xb0d5);
  for (int i = 0; i < n; ++i) {
    const Instance in = testing::random_instance(bound_gen);
    const KnowledgeBase kb = KnowledgeBase::from_document(in.doc);
    const std::string at = "bounds instance " + std::to_string(i);
    for (const auto& c : kb.cases()) {
      const ScoredCase s = score_case(in.sq, c, in.params);
      require(s.similarity >= 0.0 && s.similarity <= 1.0, at + ": similarity outside [0, 1]");
      require(std::isfinite(s.score) && s.score >= 0.0, at + ": score negative or not finite");
    }
    const auto first = search(kb, in.sq, in.params, in.limit);
    require(search(kb, in.sq, in.params, in.limit) == first, at + ": repeated search differs");
    require(search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit) == first,
            at + ": rebuilt KB differs");
  }
  return "factor, peers, permutation, bounds, determinism x " + std::to_string(n);
}

std::string run_oracle_script(const std::filesystem::path& report_path) {
  const std::string command = std::string("\"") + ONTOSEARCH_PYTHON + "\" \"" + ONTOSEARCH_ORACLE_SCRIPT + "\" \"" +
                              report_path.string() + "\"";
  FILE* pipe = ::popen(command.c_str(), "r");
  require(pipe != nullptr, "cannot start metric oracle");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  require(::pclose(pipe) == 0, "metric oracle failed");
  return out;
}

std::string check_micro_golden() {
  const auto corpus = load_corpus_file(kFixtures + "/micro-corpus.jsonl");
  const MetricsReport report = run_eval(fixture(), corpus, ScoringParams{});
  const auto report_path = std::filesystem::temp_directory_path() /
                           ("ontosearch-acceptance-" + std::to_string(::getpid()) + ".json");
  std::ofstream(report_path) << emit_report(report, ReportFormat::Json);
  const json oracle = json::parse(run_oracle_script(report_path));
  std::filesystem::remove(report_path);

  std::ifstream golden_in(ONTOSEARCH_GOLDEN_DIR "/micro_expected.json");
  require(golden_in.good(), "golden file missing");
  require(json::parse(golden_in) == oracle, "oracle output differs from frozen golden");

  auto compare = [&](const std::string& name, const MetricsCell& cell, const json& expected) {
    for (const char* avg : {"micro", "macro"}) {
      const MetricValues& m = std::string(avg) == "micro" ? cell.micro : cell.macro;
      const std::pair<const char*, std::optional<double>> values[] = {
          {"precision", m.precision}, {"recall", m.recall}, {"f_measure", m.f_measure}};
      for (const auto& [metric, value] : values) {
        const json& want = expected[avg][metric];
        const std::string at = name + " " + avg + " " + metric;
        if (want.is_null()) {
          require(!value, at + ": expected undefined");
          continue;
        }
        require(value.has_value(), at + ": undefined");
        require(format_metric(*value) == format_metric(want.get<double>()),
                at + ": " + format_metric(*value) + " vs oracle " + format_metric(want.get<double>()));
      }
    }
  };
  compare("overall", report.overall, oracle["overall"]);
  for (const auto& [dept, cell] : report.per_department) compare(dept, cell, oracle["per_department"][dept]);
  return "P/R/F = " + format_metric(*report.overall.micro.precision) + "/" +
         format_metric(*report.overall.micro.recall) + "/" + format_metric(*report.overall.micro.f_measure) +
         " (micro)";
}

std::string check_pipeline_contract() {
  const std::vector<AgentStage> chain{AgentStage::Interface, AgentStage::Manipulation, AgentStage::Extraction};
  auto stages = [](const SearchResponse& r) {
    std::vector<AgentStage> out;
    for (const auto& e : pipeline_trace(r)) out.push_back(e.stage);
    return out;
  };
  const auto corpus = load_corpus_file(kFixtures + "/queries.jsonl");
  std::size_t checked = 0;
  for (const auto& record : corpus) {
    for (const auto& dept : {std::optional<std::string>{}, std::optional<std::string>{record.department_label}}) {
      const SearchResponse r = handle_request(fixture(), RawQuery{record.text, dept, 10}, ScoringParams{});
      require(r.ok(), record.id + ": request failed");
      require(stages(r) == chain, record.id + ": trace is not Interface, Manipulation, Extraction");
      ++checked;
    }
  }
  for (const char* blank : {"", " ", "\t\n", "   "}) {
    const SearchResponse r = handle_request(fixture(), RawQuery{blank}, ScoringParams{});
    require(!r.ok() && r.error->code == "EmptyQuery", "blank query not rejected as EmptyQuery");
    require(stages(r) == std::vector<AgentStage>{AgentStage::Interface}, "EmptyQuery trace is not one event");
    ++checked;
  }
  return std::to_string(checked) + " requests";
}

std::string check_service_contract() {
  HttpServer server(std::make_shared<SearchService>(fixture(), ScoringParams{}), std::nullopt);
  const int port = server.bind_to_any_port("127.0.0.1");
  require(port > 0, "cannot bind");
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  struct Stop {
    HttpServer& s;
    std::thread& t;
    ~Stop() {
      s.stop();
      t.join();
    }
  } stop{server, serving};

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(std::chrono::seconds(5));
  const auto corpus = load_corpus_file(kFixtures + "/queries.jsonl");
  std::size_t responses = 0;
  std::size_t results = 0;
  for (const auto& record : corpus) {
    for (const std::string& dept : {std::string(), record.department_label}) {
      httplib::Params params{{"q", record.text}};
      if (!dept.empty()) params.emplace("dept", dept);
      auto res = client.Get("/api/search", params, httplib::Headers{});
      require(res != nullptr, record.id + ": no response");
      require(res->status == 200, record.id + ": status " + std::to_string(res->status));
      const json body = json::parse(res->body);
      require(body.contains("results") && body["results"].is_array(), record.id + ": no results array");
      for (const auto& r : body["results"]) {
        for (const char* field : {"full_name", "phone", "email", "position_title"}) {
          require(r.contains(field) && r[field].is_string() && !r[field].get<std::string>().empty(),
                  record.id + ": result without " + field);
        }
        require(r["employee_id"].is_string() && r["score"].is_number(), record.id + ": malformed result");
        ++results;
      }
      ++responses;
    }
  }
  require(results > 0, "no results returned at all");
  return std::to_string(responses) + " responses, " + std::to_string(results) + " results";
}

std::string check_round_trip() {
  const KnowledgeBase& kb = fixture();
  require(load_kb(serialize_kb(kb)) == kb, "fixture KB changed on round trip");
  Generator gen(0x7017);
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const KnowledgeBase random = KnowledgeBase::from_document(gen.document());
    const std::string text = serialize_kb(random);
    const KnowledgeBase back = load_kb(text);
    require(back == random, "random KB " + std::to_string(i) + " changed on round trip");
    require(serialize_kb(back) == text, "random KB " + std::to_string(i) + " serializes differently");
  }
  return "fixture + " + std::to_string(n) + " random KBs";
}

struct Criterion {
  const char* name;
  std::chrono::milliseconds budget;
  std::function<std::string()> run;
};

}  // namespace

int main() {
  using std::chrono::milliseconds;
  const std::vector<Criterion> criteria{
      {"f-measure identity", milliseconds(1000), check_f_identity},
      {"oracle equivalence", milliseconds(60000), check_oracle_equivalence},
      {"ranking property suite", milliseconds(120000), check_ranking_properties},
      {"micro-corpus golden", milliseconds(5000), check_micro_golden},
      {"pipeline contract", milliseconds(60000), check_pipeline_contract},
      {"service contract", milliseconds(30000), check_service_contract},
      {"kb round-trip", milliseconds(60000), check_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const Failure& f) {
      ok = false;
      detail = f.detail;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const auto elapsed = std::chrono::duration_cast<milliseconds>(std::chrono::steady_clock::now() - start);
    if (ok && elapsed > c.budget) {
      ok = false;
      detail += "; took " + std::to_string(elapsed.count()) + " ms, budget " + std::to_string(c.budget.count()) + " ms";
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << ": " << detail << " [" << elapsed.count() << " ms]"
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
