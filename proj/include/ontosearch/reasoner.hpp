#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontosearch/kb.hpp"
#include "ontosearch/query.hpp"

namespace ontosearch {

struct ScoringParams {
  double lambda_peer = 0.1;
  double dept_match_boost = 1.25;
  double dept_mismatch_penalty = 0.75;
  bool hard_department_filter = false;
  double threshold = 0.2;
  double expansion_weight = kDefaultExpansionWeight;

  /// Empty when every bound holds.
  std::vector<std::string> violations() const;
  /// Throws std::invalid_argument listing the violated bounds.
  void validate() const;

  friend bool operator==(const ScoringParams&, const ScoringParams&) = default;
};

struct ScoredCase {
  std::string case_id;
  double similarity = 0.0;
  double confidence = 0.0;
  double department_modifier = 1.0;
  double score = 0.0;
  std::set<ConceptId> matched_concepts;

  friend bool operator==(const ScoredCase&, const ScoredCase&) = default;
};

struct SearchResult {
  std::string employee_id;
  std::string full_name;
  std::string phone;
  std::string email;
  std::string position_title;
  std::string department_id;
  double score = 0.0;
  ScoredCase best_case;
  double factor = 1.0;
  std::int64_t peers = 0;
  std::string explanation;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

class EmptyQueryConcepts : public std::invalid_argument {
 public:
  EmptyQueryConcepts() : std::invalid_argument("semantic query has no concepts") {}
};

/// Weighted query coverage: the share of query weight mass whose concepts the
/// case contains.
double similarity(const SemanticQuery& sq, const Case& c);

/// factor * (1 + lambda_peer * log2(1 + peers)).
double confidence(const Case& c, const ScoringParams& params);

/// Boost when the query's department key equals the case's, penalty when both
/// are set and differ (zero under the hard filter), 1 otherwise.
double department_modifier(const SemanticQuery& sq, const Case& c, const ScoringParams& params);

ScoredCase score_case(const SemanticQuery& sq, const Case& c, const ScoringParams& params);

/// Candidate cases come from the concept index. Each employee is represented
/// by its best case; results with zero score or score below the threshold are
/// dropped; order is score descending, then employee id ascending.
std::vector<SearchResult> search(const KnowledgeBase& kb, const SemanticQuery& sq,
                                 const ScoringParams& params,
                                 std::size_t limit = kDefaultResultLimit);

std::string explain(const ScoredCase& scored, const Case& c);

}  // namespace ontosearch
