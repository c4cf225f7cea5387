#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ontosearch {

/// Lowercase vocabulary atom of the ontology, `[a-z][a-z0-9_]*`.
using ConceptId = std::string;

struct ClassDef {
  std::string name;
  std::optional<std::string> parent;

  friend bool operator==(const ClassDef&, const ClassDef&) = default;
};

struct Department {
  std::string id;
  std::string name;
  std::set<std::string> aliases;

  friend bool operator==(const Department&, const Department&) = default;
};

struct Employee {
  std::string id;
  std::string full_name;
  std::string phone;
  std::string email;
  std::string position_title;
  std::string department_id;

  friend bool operator==(const Employee&, const Employee&) = default;
};

/// A responsibility assertion: employee `employee_id` handles work described
/// by `concepts`. `factor` is the imperfection factor in (0, 1] and `peers`
/// the number of related peers.
struct Case {
  std::string id;
  std::string employee_id;
  std::set<ConceptId> concepts;
  std::optional<std::string> department_id;
  double factor = 1.0;
  std::int64_t peers = 0;

  friend bool operator==(const Case&, const Case&) = default;
};

/// Lowercase surface term -> concepts it denotes.
using Lexicon = std::map<std::string, std::set<ConceptId>>;

/// Concept -> ids of the cases that mention it.
using ConceptIndex = std::map<ConceptId, std::set<std::string>>;

/// Raw knowledge base content, before validation and indexing.
struct KbDocument {
  std::vector<ClassDef> classes;
  std::set<ConceptId> concepts;
  std::vector<Department> departments;
  std::vector<Employee> employees;
  std::vector<Case> cases;
  Lexicon lexicon;

  // Set by the JSON reader when `concepts` lists an id more than once; the
  // set above has already collapsed them.
  std::vector<ConceptId> duplicate_concepts;
};

struct Violation {
  std::string kind;  // "class", "concept", "department", "employee", "case", "lexicon"
  std::string id;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string to_string(const Violation& v);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0);

  /// 1-based; zero when the error is structural rather than lexical.
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class UnknownClass : public std::invalid_argument {
 public:
  explicit UnknownClass(const std::string& name);
};

bool is_valid_concept_id(std::string_view id);

std::vector<Violation> validate_kb(const KbDocument& doc);

/// Inverts case concept sets. Assumes referential integrity.
ConceptIndex build_index(const std::vector<Case>& cases);

class Vocabulary;

/// Validated, indexed, immutable knowledge base. Copies share the same
/// underlying storage; all accessors are safe for concurrent use.
class KnowledgeBase {
 public:
  /// Throws ValidationError listing every violation found.
  static KnowledgeBase from_document(KbDocument doc);

  const std::vector<ClassDef>& classes() const;
  const std::set<ConceptId>& concepts() const;
  const std::vector<Department>& departments() const;
  const std::vector<Employee>& employees() const;
  const std::vector<Case>& cases() const;
  const Lexicon& lexicon() const;
  const ConceptIndex& index() const;
  const KbDocument& document() const;

  const Employee* find_employee(std::string_view id) const;
  const Department* find_department(std::string_view id) const;
  const Case* find_case(std::string_view id) const;
  const ClassDef* find_class(std::string_view name) const;

  /// Lexicon terms whose concept set contains `concept_id`, in term order.
  std::span<const std::string_view> terms_containing(std::string_view concept_id) const;

  /// Query-side view: lexicon and departments only, no employee records.
  Vocabulary vocabulary() const;

  /// SHA-256 of the canonical serialization, lowercase hex.
  const std::string& fingerprint() const;

  /// Field-by-field comparison; sets compare order-insensitively.
  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b);

 private:
  struct State;
  explicit KnowledgeBase(std::shared_ptr<const State> state);
  std::shared_ptr<const State> state_;
};

/// Read-only lexicon and department access for query manipulation.
class Vocabulary {
 public:
  explicit Vocabulary(const KnowledgeBase& kb) : kb_(&kb) {}

  const std::vector<Department>& departments() const { return kb_->departments(); }
  const Department* find_department(std::string_view id) const { return kb_->find_department(id); }
  const Lexicon& lexicon() const { return kb_->lexicon(); }
  bool has_concept(std::string_view id) const;

  /// Concepts sharing at least one lexicon entry with `concept_id`, excluding it.
  std::set<ConceptId> siblings(const ConceptId& concept_id) const;

 private:
  const KnowledgeBase* kb_;
};

/// Lexicon lookup with suffix-strip fallback ("es", "s", "ing"; the
/// remaining stem must keep at least three characters).
std::set<ConceptId> lookup_concepts(const Vocabulary& vocab, std::string_view term);
std::set<ConceptId> lookup_concepts(const KnowledgeBase& kb, std::string_view term);

/// True iff `a == b` or `b` is an ancestor of `a`. Throws UnknownClass.
bool subclass_of(const KnowledgeBase& kb, std::string_view a, std::string_view b);

// JSON file format (kb_json.cpp).
KbDocument parse_kb_document(std::string_view text);
KnowledgeBase load_kb(std::istream& source);
KnowledgeBase load_kb(std::string_view text);
KnowledgeBase load_kb_file(const std::filesystem::path& path);
std::string serialize_kb(const KbDocument& doc);
std::string serialize_kb(const KnowledgeBase& kb);

}  // namespace ontosearch
