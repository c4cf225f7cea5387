#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ontosearch/kb.hpp"

namespace ontosearch {

inline constexpr double kDirectWeight = 1.0;
inline constexpr double kDefaultExpansionWeight = 0.5;
inline constexpr std::size_t kDefaultResultLimit = 10;

struct RawQuery {
  std::string text;
  std::optional<std::string> department_filter;
  std::size_t k = kDefaultResultLimit;
};

struct SemanticQuery {
  /// Concept -> weight in (0, 1]. Lexicon hits carry 1.0, expansions the
  /// configured expansion weight.
  std::map<ConceptId, double> concepts;
  /// Members of `concepts` that were added by expansion.
  std::set<ConceptId> expanded;
  std::optional<std::string> department_key;
  std::vector<std::string> unknown_terms;
  std::string origin_text;

  friend bool operator==(const SemanticQuery&, const SemanticQuery&) = default;
};

/// Base for request validation failures raised before any search runs.
class QueryError : public std::invalid_argument {
 public:
  QueryError(std::string code, const std::string& message)
      : std::invalid_argument(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class EmptyQuery : public QueryError {
 public:
  EmptyQuery() : QueryError("EmptyQuery", "query text is blank") {}
};

class InvalidResultLimit : public QueryError {
 public:
  InvalidResultLimit() : QueryError("InvalidQuery", "k must be at least 1") {}
};

class UnknownDepartment : public QueryError {
 public:
  explicit UnknownDepartment(const std::string& id)
      : QueryError("UnknownDepartment", "unknown department '" + id + "'") {}
};

/// The fixed stopword list applied by normalize().
const std::set<std::string, std::less<>>& stopwords();

/// Lowercases ASCII, turns punctuation into spaces, splits on whitespace and
/// drops stopwords. Token order and duplicates are preserved.
std::vector<std::string> normalize(std::string_view text);

struct DepartmentMatch {
  std::optional<std::string> department_id;
  std::vector<std::string> remaining;

  friend bool operator==(const DepartmentMatch&, const DepartmentMatch&) = default;
};

/// Leftmost token or adjacent-token pair equal to a department name or alias.
/// At a given position the pair is tried before the single token.
DepartmentMatch detect_department(const Vocabulary& vocab, std::span<const std::string> tokens);

/// Checks the request shape: non-blank text, k >= 1, and a resolvable
/// department filter. Throws the matching QueryError.
void validate_raw_query(const Vocabulary& vocab, const RawQuery& raw);

/// normalize -> department detection -> lexicon lookup. Does not expand; see
/// expand_query().
SemanticQuery build_semantic_query(const Vocabulary& vocab, const RawQuery& raw);
SemanticQuery build_semantic_query(const KnowledgeBase& kb, const RawQuery& raw);

/// One-hop expansion over lexicon co-membership of directly mapped concepts.
/// Idempotent.
SemanticQuery expand_query(const Vocabulary& vocab, SemanticQuery sq,
                           double expansion_weight = kDefaultExpansionWeight);
SemanticQuery expand_query(const KnowledgeBase& kb, SemanticQuery sq,
                           double expansion_weight = kDefaultExpansionWeight);

}  // namespace ontosearch
