#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ontosearch/kb.hpp"
#include "ontosearch/reasoner.hpp"

namespace ontosearch {

struct QueryRecord {
  std::string id;
  std::string text;
  std::string department_label;
  std::set<std::string> relevant;
  std::optional<std::size_t> k_override;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

/// Set-based retrieval metrics. An empty optional means "undefined".
std::optional<double> precision(const std::set<std::string>& retrieved, const std::set<std::string>& relevant);
std::optional<double> recall(const std::set<std::string>& retrieved, const std::set<std::string>& relevant);
/// Harmonic mean; undefined when either input is undefined or p + r == 0.
std::optional<double> f_measure(std::optional<double> p, std::optional<double> r);

struct MetricValues {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_measure;

  friend bool operator==(const MetricValues&, const MetricValues&) = default;
};

struct MetricsCell {
  std::size_t query_count = 0;
  std::size_t retrieved_total = 0;
  std::size_t relevant_total = 0;
  std::size_t hit_total = 0;
  MetricValues micro;  // from pooled counts
  MetricValues macro;  // mean of defined per-query values

  friend bool operator==(const MetricsCell&, const MetricsCell&) = default;
};

struct QueryOutcome {
  std::string id;
  std::string department_label;
  std::size_t k = 0;
  std::vector<std::string> retrieved;  // rank order
  std::set<std::string> relevant;
  std::size_t hits = 0;
  MetricValues metrics;

  friend bool operator==(const QueryOutcome&, const QueryOutcome&) = default;
};

struct MetricsReport {
  std::map<std::string, MetricsCell> per_department;
  MetricsCell overall;
  ScoringParams params;
  std::size_t default_k = kDefaultResultLimit;
  std::string corpus_fingerprint;
  std::vector<QueryOutcome> queries;  // corpus order

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// One JSON object per line: {"id","text","department","relevant","k"?}.
/// Blank lines are skipped. Throws ParseError carrying the line number.
std::vector<QueryRecord> parse_corpus(std::istream& in);
std::vector<QueryRecord> load_corpus_file(const std::filesystem::path& path);

/// Content hash over the canonical form of the records.
std::string corpus_fingerprint(const std::vector<QueryRecord>& corpus);

/// Every unresolvable reference in the corpus, in corpus order.
std::vector<std::string> check_corpus(const KnowledgeBase& kb, const std::vector<QueryRecord>& corpus);

/// Runs every record through the request pipeline. Throws CorpusError before
/// any query runs if check_corpus() reports problems. `threads == 0` picks the
/// hardware concurrency.
MetricsReport run_eval(const KnowledgeBase& kb, const std::vector<QueryRecord>& corpus,
                       const ScoringParams& params, std::size_t default_k = kDefaultResultLimit,
                       std::size_t threads = 0);

enum class ReportFormat { Json, Csv };
enum class Averaging { Micro, Macro };

/// Fixed-point with four decimals, ties to even on the exact binary value.
std::string format_metric(double value);

/// JSON: canonical, keys sorted, full-precision numbers, undefined as null.
/// CSV: header, one row per department, then `overall`; metrics from the
/// chosen averaging with four decimals, undefined as an empty field.
std::string emit_report(const MetricsReport& report, ReportFormat format, Averaging averaging = Averaging::Micro);

MetricsReport parse_report_json(std::string_view text);

}  // namespace ontosearch
