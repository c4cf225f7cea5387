#include "ontosearch/orchestrator.hpp"

#include "ontosearch/digest.hpp"

namespace ontosearch {

namespace {

// Each stage sees only what its signature hands it: the manipulation agent
// works from the vocabulary view, the extraction agent from the semantic query.

SemanticQuery manipulation_stage(const Vocabulary& vocab, const RawQuery& raw, double expansion_weight) {
  return expand_query(vocab, build_semantic_query(vocab, raw), expansion_weight);
}

std::vector<SearchResult> extraction_stage(const KnowledgeBase& kb, const SemanticQuery& sq,
                                           const ScoringParams& params, std::size_t limit) {
  return search(kb, sq, params, limit);
}

class StageTimer {
 public:
  StageTimer(const MonotonicClock& clock, std::vector<StageEvent>& trace, const std::string& request_id,
             AgentStage stage)
      : clock_(clock), trace_(trace) {
    event_.request_id = request_id;
    event_.stage = stage;
    event_.started_at = clock_();
  }

  void finish(std::string summary) {
    event_.summary = std::move(summary);
    event_.ended_at = clock_();
    trace_.push_back(std::move(event_));
  }

 private:
  const MonotonicClock& clock_;
  std::vector<StageEvent>& trace_;
  StageEvent event_;
};

}  // namespace

std::string_view to_string(AgentStage stage) {
  switch (stage) {
    case AgentStage::Interface: return "Interface";
    case AgentStage::Manipulation: return "Manipulation";
    case AgentStage::Extraction: return "Extraction";
  }
  return "Unknown";
}

MonotonicClock steady_clock_source() {
  return [] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
  };
}

std::string make_request_id(const RawQuery& raw) {
  std::string key = raw.text;
  key.push_back('\x1f');
  key += raw.department_filter.value_or("");
  key.push_back('\x1f');
  key += std::to_string(raw.k);
  return "q-" + sha256_hex(key).substr(0, 16);
}

SearchResponse handle_request(const KnowledgeBase& kb, const RawQuery& raw, const ScoringParams& params,
                              const MonotonicClock& clock) {
  params.validate();
  SearchResponse response;
  response.request_id = make_request_id(raw);
  const Vocabulary vocab = kb.vocabulary();

  {
    StageTimer timer(clock, response.trace, response.request_id, AgentStage::Interface);
    try {
      validate_raw_query(vocab, raw);
    } catch (const QueryError& e) {
      response.error = ResponseError{e.code(), e.what()};
      response.diagnostics.push_back(e.what());
      timer.finish("rejected: " + e.code());
      return response;
    }
    timer.finish("accepted k=" + std::to_string(raw.k));
  }

  SemanticQuery sq;
  {
    StageTimer timer(clock, response.trace, response.request_id, AgentStage::Manipulation);
    sq = manipulation_stage(vocab, raw, params.expansion_weight);
    timer.finish(std::to_string(sq.concepts.size()) + " concepts (" + std::to_string(sq.expanded.size()) +
                 " expanded), " + std::to_string(sq.unknown_terms.size()) + " unknown terms");
  }

  {
    StageTimer timer(clock, response.trace, response.request_id, AgentStage::Extraction);
    response.results = extraction_stage(kb, sq, params, raw.k);
    timer.finish(std::to_string(response.results.size()) + " results");
  }

  response.unknown_terms = sq.unknown_terms;
  response.department_key = sq.department_key;
  if (sq.concepts.empty()) response.diagnostics.push_back("no concepts mapped");
  if (!sq.unknown_terms.empty()) {
    std::string line = "unmapped terms:";
    for (const auto& t : sq.unknown_terms) line += " " + t;
    response.diagnostics.push_back(std::move(line));
  }
  if (!sq.concepts.empty() && response.results.empty()) {
    response.diagnostics.push_back("no case scored at or above the threshold");
  }
  return response;
}

const std::vector<StageEvent>& pipeline_trace(const SearchResponse& response) { return response.trace; }

}  // namespace ontosearch
