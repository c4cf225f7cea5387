#include "ontosearch/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ontosearch/digest.hpp"
#include "ontosearch/orchestrator.hpp"

namespace ontosearch {

namespace {

using nlohmann::json;

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.contains(x) ? 1 : 0;
  return n;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

class MeanAccumulator {
 public:
  void add(const std::optional<double>& v) {
    if (!v) return;
    sum_ += *v;
    ++n_;
  }
  std::optional<double> mean() const { return ratio_of(sum_, n_); }

 private:
  static std::optional<double> ratio_of(double sum, std::size_t n) {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

MetricsCell aggregate(const std::vector<const QueryOutcome*>& outcomes) {
  MetricsCell cell;
  MeanAccumulator p;
  MeanAccumulator r;
  MeanAccumulator f;
  for (const QueryOutcome* q : outcomes) {
    ++cell.query_count;
    cell.retrieved_total += q->retrieved.size();
    cell.relevant_total += q->relevant.size();
    cell.hit_total += q->hits;
    p.add(q->metrics.precision);
    r.add(q->metrics.recall);
    f.add(q->metrics.f_measure);
  }
  cell.micro.precision = ratio(cell.hit_total, cell.retrieved_total);
  cell.micro.recall = ratio(cell.hit_total, cell.relevant_total);
  cell.micro.f_measure = f_measure(cell.micro.precision, cell.micro.recall);
  cell.macro = {p.mean(), r.mean(), f.mean()};
  return cell;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json metrics_json(const MetricValues& m) {
  return {{"precision", optional_number(m.precision)},
          {"recall", optional_number(m.recall)},
          {"f_measure", optional_number(m.f_measure)}};
}

MetricValues metrics_from(const json& j) {
  return {number_or_null(j.at("precision")), number_or_null(j.at("recall")), number_or_null(j.at("f_measure"))};
}

json cell_json(const MetricsCell& c) {
  return {{"query_count", c.query_count},   {"retrieved_total", c.retrieved_total},
          {"relevant_total", c.relevant_total}, {"hit_total", c.hit_total},
          {"micro", metrics_json(c.micro)}, {"macro", metrics_json(c.macro)}};
}

MetricsCell cell_from(const json& j) {
  MetricsCell c;
  c.query_count = j.at("query_count").get<std::size_t>();
  c.retrieved_total = j.at("retrieved_total").get<std::size_t>();
  c.relevant_total = j.at("relevant_total").get<std::size_t>();
  c.hit_total = j.at("hit_total").get<std::size_t>();
  c.micro = metrics_from(j.at("micro"));
  c.macro = metrics_from(j.at("macro"));
  return c;
}

json params_json(const ScoringParams& p) {
  return {{"lambda_peer", p.lambda_peer},
          {"dept_match_boost", p.dept_match_boost},
          {"dept_mismatch_penalty", p.dept_mismatch_penalty},
          {"hard_department_filter", p.hard_department_filter},
          {"threshold", p.threshold},
          {"expansion_weight", p.expansion_weight}};
}

ScoringParams params_from(const json& j) {
  ScoringParams p;
  p.lambda_peer = j.at("lambda_peer").get<double>();
  p.dept_match_boost = j.at("dept_match_boost").get<double>();
  p.dept_mismatch_penalty = j.at("dept_mismatch_penalty").get<double>();
  p.hard_department_filter = j.at("hard_department_filter").get<bool>();
  p.threshold = j.at("threshold").get<double>();
  p.expansion_weight = j.at("expansion_weight").get<double>();
  return p;
}

json record_json(const QueryRecord& r) {
  json j = {{"id", r.id}, {"text", r.text}, {"department", r.department_label}, {"relevant", r.relevant}};
  if (r.k_override) j["k"] = *r.k_override;
  return j;
}

QueryRecord record_from(const json& j, std::size_t line) {
  auto fail = [line](const std::string& message) { throw ParseError("corpus record: " + message, line, 1); };
  if (!j.is_object()) fail("expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "text" && key != "department" && key != "relevant" && key != "k") {
      fail("unknown key '" + key + "'");
    }
  }
  auto string_field = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) fail(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };
  QueryRecord r;
  r.id = string_field("id");
  r.text = string_field("text");
  r.department_label = string_field("department");
  auto rel = j.find("relevant");
  if (rel == j.end() || !rel->is_array()) fail("'relevant' must be an array of strings");
  for (const auto& v : *rel) {
    if (!v.is_string()) fail("'relevant' must be an array of strings");
    r.relevant.insert(v.get<std::string>());
  }
  if (auto k = j.find("k"); k != j.end() && !k->is_null()) {
    if (!k->is_number_unsigned() || k->get<std::uint64_t>() < 1) fail("'k' must be a positive integer");
    r.k_override = k->get<std::size_t>();
  }
  return r;
}

}  // namespace

std::optional<double> precision(const std::set<std::string>& retrieved, const std::set<std::string>& relevant) {
  return ratio(intersection_size(retrieved, relevant), retrieved.size());
}

std::optional<double> recall(const std::set<std::string>& retrieved, const std::set<std::string>& relevant) {
  return ratio(intersection_size(retrieved, relevant), relevant.size());
}

std::optional<double> f_measure(std::optional<double> p, std::optional<double> r) {
  if (!p || !r || *p + *r == 0.0) return std::nullopt;
  return 2.0 * *p * *r / (*p + *r);
}

CorpusError::CorpusError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string message = "corpus has " + std::to_string(problems.size()) + " problem(s)";
        for (const auto& p : problems) message += "\n  " + p;
        return message;
      }()),
      problems_(std::move(problems)) {}

std::vector<QueryRecord> parse_corpus(std::istream& in) {
  std::vector<QueryRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed corpus line: ") + e.what(), line_no, e.byte);
    }
    out.push_back(record_from(j, line_no));
  }
  return out;
}

std::vector<QueryRecord> load_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file '" + path.string() + "'");
  return parse_corpus(in);
}

std::string corpus_fingerprint(const std::vector<QueryRecord>& corpus) {
  std::string canonical;
  for (const auto& r : corpus) canonical += record_json(r).dump() + "\n";
  return sha256_hex(canonical);
}

std::vector<std::string> check_corpus(const KnowledgeBase& kb, const std::vector<QueryRecord>& corpus) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& r : corpus) {
    const std::string where = "query '" + r.id + "': ";
    if (r.id.empty()) problems.push_back(where + "empty id");
    else if (!seen.insert(r.id).second) problems.push_back(where + "duplicate id");
    if (std::all_of(r.text.begin(), r.text.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
      problems.push_back(where + "blank text");
    }
    if (!kb.find_department(r.department_label)) {
      problems.push_back(where + "unknown department '" + r.department_label + "'");
    }
    if (r.relevant.empty()) problems.push_back(where + "relevant set is empty");
    for (const auto& e : r.relevant) {
      if (!kb.find_employee(e)) problems.push_back(where + "unknown employee '" + e + "'");
    }
  }
  return problems;
}

MetricsReport run_eval(const KnowledgeBase& kb, const std::vector<QueryRecord>& corpus,
                       const ScoringParams& params, std::size_t default_k, std::size_t threads) {
  params.validate();
  if (corpus.empty()) throw CorpusError({"corpus is empty"});
  if (default_k < 1) throw std::invalid_argument("default k must be at least 1");
  if (auto problems = check_corpus(kb, corpus); !problems.empty()) throw CorpusError(std::move(problems));

  MetricsReport report;
  report.params = params;
  report.default_k = default_k;
  report.corpus_fingerprint = corpus_fingerprint(corpus);
  report.queries.resize(corpus.size());

  auto run_one = [&](std::size_t i) {
    const QueryRecord& record = corpus[i];
    QueryOutcome& out = report.queries[i];
    out.id = record.id;
    out.department_label = record.department_label;
    out.k = record.k_override.value_or(default_k);
    out.relevant = record.relevant;
    const SearchResponse response = handle_request(kb, RawQuery{record.text, std::nullopt, out.k}, params);
    std::set<std::string> retrieved;
    for (const auto& r : response.results) {
      out.retrieved.push_back(r.employee_id);
      retrieved.insert(r.employee_id);
    }
    out.hits = intersection_size(retrieved, out.relevant);
    out.metrics.precision = precision(retrieved, out.relevant);
    out.metrics.recall = recall(retrieved, out.relevant);
    out.metrics.f_measure = f_measure(out.metrics.precision, out.metrics.recall);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, corpus.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) run_one(i);
  } else {
    // Each worker writes only its own slots; aggregation happens afterwards.
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) run_one(i);
      });
    }
  }

  std::map<std::string, std::vector<const QueryOutcome*>> by_department;
  std::vector<const QueryOutcome*> all;
  for (const auto& q : report.queries) {
    by_department[q.department_label].push_back(&q);
    all.push_back(&q);
  }
  for (const auto& [dept, outcomes] : by_department) report.per_department[dept] = aggregate(outcomes);
  report.overall = aggregate(all);
  return report;
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string emit_report(const MetricsReport& report, ReportFormat format, Averaging averaging) {
  if (format == ReportFormat::Json) {
    json per_department = json::object();
    for (const auto& [dept, cell] : report.per_department) per_department[dept] = cell_json(cell);
    json queries = json::array();
    for (const auto& q : report.queries) {
      queries.push_back({{"id", q.id},
                         {"department", q.department_label},
                         {"k", q.k},
                         {"retrieved", q.retrieved},
                         {"relevant", q.relevant},
                         {"hits", q.hits},
                         {"metrics", metrics_json(q.metrics)}});
    }
    json root = {{"averaging", {"micro", "macro"}},
                 {"corpus_fingerprint", report.corpus_fingerprint},
                 {"default_k", report.default_k},
                 {"params", params_json(report.params)},
                 {"overall", cell_json(report.overall)},
                 {"per_department", std::move(per_department)},
                 {"queries", std::move(queries)}};
    return root.dump(2) + "\n";
  }

  std::ostringstream os;
  auto field = [](const std::optional<double>& v) { return v ? format_metric(*v) : std::string(); };
  auto row = [&](const std::string& name, const MetricsCell& cell) {
    const MetricValues& m = averaging == Averaging::Micro ? cell.micro : cell.macro;
    os << name << ',' << cell.query_count << ',' << field(m.precision) << ',' << field(m.recall) << ','
       << field(m.f_measure) << '\n';
  };
  os << "department,queries,precision,recall,f_measure\n";
  for (const auto& [dept, cell] : report.per_department) row(dept, cell);
  row("overall", report.overall);
  return os.str();
}

MetricsReport parse_report_json(std::string_view text) {
  const json root = json::parse(text.begin(), text.end());
  MetricsReport report;
  report.corpus_fingerprint = root.at("corpus_fingerprint").get<std::string>();
  report.default_k = root.at("default_k").get<std::size_t>();
  report.params = params_from(root.at("params"));
  report.overall = cell_from(root.at("overall"));
  for (const auto& [dept, cell] : root.at("per_department").items()) report.per_department[dept] = cell_from(cell);
  for (const auto& q : root.at("queries")) {
    QueryOutcome out;
    out.id = q.at("id").get<std::string>();
    out.department_label = q.at("department").get<std::string>();
    out.k = q.at("k").get<std::size_t>();
    out.retrieved = q.at("retrieved").get<std::vector<std::string>>();
    out.relevant = q.at("relevant").get<std::set<std::string>>();
    out.hits = q.at("hits").get<std::size_t>();
    out.metrics = metrics_from(q.at("metrics"));
    report.queries.push_back(std::move(out));
  }
  return report;
}

}  // namespace ontosearch
