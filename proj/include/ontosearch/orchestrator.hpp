#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ontosearch/kb.hpp"
#include "ontosearch/query.hpp"
#include "ontosearch/reasoner.hpp"

namespace ontosearch {

/// The three agents of the request chain, in pipeline order.
enum class AgentStage { Interface, Manipulation, Extraction };

std::string_view to_string(AgentStage stage);

/// Nanoseconds on a monotonic time line.
using MonotonicClock = std::function<std::chrono::nanoseconds()>;

MonotonicClock steady_clock_source();

struct StageEvent {
  std::string request_id;
  AgentStage stage = AgentStage::Interface;
  std::chrono::nanoseconds started_at{0};
  std::chrono::nanoseconds ended_at{0};
  std::string summary;
};

struct ResponseError {
  std::string code;  // "EmptyQuery", "InvalidQuery", "UnknownDepartment"
  std::string message;
};

struct SearchResponse {
  std::string request_id;
  std::vector<SearchResult> results;
  std::vector<std::string> unknown_terms;
  std::optional<std::string> department_key;
  std::vector<StageEvent> trace;
  std::vector<std::string> diagnostics;
  std::optional<ResponseError> error;

  bool ok() const { return !error.has_value(); }
};

/// Content-derived request id, so identical requests produce identical
/// responses (apart from trace timestamps).
std::string make_request_id(const RawQuery& raw);

/// Runs Interface -> Manipulation -> Extraction. Validation failures are
/// returned as a structured error with a one-event trace rather than thrown.
SearchResponse handle_request(const KnowledgeBase& kb, const RawQuery& raw, const ScoringParams& params,
                              const MonotonicClock& clock = steady_clock_source());

const std::vector<StageEvent>& pipeline_trace(const SearchResponse& response);

}  // namespace ontosearch
