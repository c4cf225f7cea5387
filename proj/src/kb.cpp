#include "ontosearch/kb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "ontosearch/digest.hpp"

namespace ontosearch {

namespace {

bool is_lowercase(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c) != 0; });
}

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string join_messages(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << violations.size() << " knowledge base violation" << (violations.size() == 1 ? "" : "s");
  for (const auto& v : violations) os << "\n  " << to_string(v);
  return os.str();
}

class ViolationSink {
 public:
  void add(std::string kind, std::string id, std::string message) {
    out_.push_back({std::move(kind), std::move(id), std::move(message)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

void check_classes(const KbDocument& doc, ViolationSink& sink) {
  std::unordered_map<std::string, const ClassDef*> by_name;
  for (const auto& c : doc.classes) {
    if (c.name.empty()) {
      sink.add("class", c.name, "class name is empty");
      continue;
    }
    if (!by_name.emplace(c.name, &c).second) sink.add("class", c.name, "duplicate class name");
  }
  for (const auto& c : doc.classes) {
    if (c.parent && !by_name.contains(*c.parent)) {
      sink.add("class", c.name, "parent '" + *c.parent + "' is not a declared class");
    }
  }
  // A class is on a cycle iff walking its parent chain returns to it.
  for (const auto& c : doc.classes) {
    if (c.name.empty()) continue;
    std::unordered_set<std::string> seen{c.name};
    const ClassDef* cur = by_name[c.name];
    while (cur->parent) {
      auto it = by_name.find(*cur->parent);
      if (it == by_name.end()) break;
      if (it->first == c.name) {
        sink.add("class", c.name, "parent chain forms a cycle");
        break;
      }
      if (!seen.insert(it->first).second) break;  // cycle further up, reported there
      cur = it->second;
    }
  }
}

void check_concepts(const KbDocument& doc, ViolationSink& sink) {
  for (const auto& id : doc.concepts) {
    if (!is_valid_concept_id(id)) {
      sink.add("concept", id, "concept id must match [a-z][a-z0-9_]*");
    }
  }
  for (const auto& id : doc.duplicate_concepts) sink.add("concept", id, "concept declared more than once");
}

void check_departments(const KbDocument& doc, ViolationSink& sink) {
  std::unordered_set<std::string> ids;
  for (const auto& d : doc.departments) {
    if (d.id.empty()) sink.add("department", d.id, "department id is empty");
    else if (!ids.insert(d.id).second) sink.add("department", d.id, "duplicate department id");
    if (d.name.empty()) sink.add("department", d.id, "department name is empty");
    for (const auto& alias : d.aliases) {
      if (alias.empty()) sink.add("department", d.id, "empty alias");
      else if (!is_lowercase(alias)) sink.add("department", d.id, "alias '" + alias + "' is not lowercase");
    }
  }
}

void check_employees(const KbDocument& doc, const std::unordered_set<std::string>& department_ids,
                     ViolationSink& sink) {
  std::unordered_set<std::string> ids;
  for (const auto& e : doc.employees) {
    if (e.id.empty()) sink.add("employee", e.id, "employee id is empty");
    else if (!ids.insert(e.id).second) sink.add("employee", e.id, "duplicate employee id");
    const std::pair<const char*, const std::string*> fields[] = {
        {"full_name", &e.full_name}, {"phone", &e.phone}, {"email", &e.email},
        {"position_title", &e.position_title}, {"department_id", &e.department_id}};
    for (const auto& [name, value] : fields) {
      if (value->empty()) sink.add("employee", e.id, std::string(name) + " is empty");
    }
    if (!e.email.empty() && std::count(e.email.begin(), e.email.end(), '@') != 1) {
      sink.add("employee", e.id, "email must contain exactly one '@'");
    }
    if (!e.department_id.empty() && !department_ids.contains(e.department_id)) {
      sink.add("employee", e.id, "unknown department '" + e.department_id + "'");
    }
  }
}

void check_cases(const KbDocument& doc, const std::unordered_set<std::string>& department_ids,
                 ViolationSink& sink) {
  std::unordered_set<std::string> employee_ids;
  for (const auto& e : doc.employees) employee_ids.insert(e.id);

  std::unordered_set<std::string> ids;
  for (const auto& c : doc.cases) {
    if (c.id.empty()) sink.add("case", c.id, "case id is empty");
    else if (!ids.insert(c.id).second) sink.add("case", c.id, "duplicate case id");
    if (!employee_ids.contains(c.employee_id)) {
      sink.add("case", c.id, "unknown employee '" + c.employee_id + "'");
    }
    if (c.department_id && !department_ids.contains(*c.department_id)) {
      sink.add("case", c.id, "unknown department '" + *c.department_id + "'");
    }
    if (!(std::isfinite(c.factor) && c.factor > 0.0 && c.factor <= 1.0)) {
      std::ostringstream os;
      os << "factor " << c.factor << " outside (0, 1]";
      sink.add("case", c.id, os.str());
    }
    if (c.peers < 0) sink.add("case", c.id, "peers " + std::to_string(c.peers) + " is negative");
    if (c.concepts.empty()) sink.add("case", c.id, "concept set is empty");
    for (const auto& k : c.concepts) {
      if (!doc.concepts.contains(k)) sink.add("case", c.id, "undeclared concept '" + k + "'");
    }
  }
}

void check_lexicon(const KbDocument& doc, ViolationSink& sink) {
  for (const auto& [term, concepts] : doc.lexicon) {
    if (term.empty()) sink.add("lexicon", term, "empty term");
    else if (!is_lowercase(term) || has_whitespace(term)) {
      sink.add("lexicon", term, "term must be lowercase without whitespace");
    }
    if (concepts.empty()) sink.add("lexicon", term, "term maps to no concepts");
    for (const auto& k : concepts) {
      if (!doc.concepts.contains(k)) sink.add("lexicon", term, "undeclared concept '" + k + "'");
    }
  }
}

}  // namespace

std::string to_string(const Violation& v) {
  return v.kind + " '" + v.id + "': " + v.message;
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line ? what + " (line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ")"
                              : what),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_messages(violations)), violations_(std::move(violations)) {}

UnknownClass::UnknownClass(const std::string& name)
    : std::invalid_argument("unknown class '" + name + "'") {}

bool is_valid_concept_id(std::string_view id) {
  if (id.empty() || id.front() < 'a' || id.front() > 'z') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::vector<Violation> validate_kb(const KbDocument& doc) {
  ViolationSink sink;
  std::unordered_set<std::string> department_ids;
  for (const auto& d : doc.departments) department_ids.insert(d.id);

  check_classes(doc, sink);
  check_concepts(doc, sink);
  check_departments(doc, sink);
  check_employees(doc, department_ids, sink);
  check_cases(doc, department_ids, sink);
  check_lexicon(doc, sink);
  return sink.take();
}

ConceptIndex build_index(const std::vector<Case>& cases) {
  ConceptIndex index;
  for (const auto& c : cases) {
    for (const auto& k : c.concepts) index[k].insert(c.id);
  }
  return index;
}

struct KnowledgeBase::State {
  KbDocument doc;
  ConceptIndex index;
  std::unordered_map<std::string_view, std::size_t> employee_pos;
  std::unordered_map<std::string_view, std::size_t> department_pos;
  std::unordered_map<std::string_view, std::size_t> case_pos;
  std::unordered_map<std::string_view, std::size_t> class_pos;
  // concept -> lexicon terms containing it
  std::unordered_map<std::string_view, std::vector<std::string_view>> terms_by_concept;
  std::string fingerprint;
};

KnowledgeBase::KnowledgeBase(std::shared_ptr<const State> state) : state_(std::move(state)) {}

KnowledgeBase KnowledgeBase::from_document(KbDocument doc) {
  if (auto violations = validate_kb(doc); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  auto state = std::make_shared<State>();
  state->doc = std::move(doc);
  state->doc.duplicate_concepts.clear();
  const KbDocument& d = state->doc;

  state->index = build_index(d.cases);
  for (std::size_t i = 0; i < d.employees.size(); ++i) state->employee_pos.emplace(d.employees[i].id, i);
  for (std::size_t i = 0; i < d.departments.size(); ++i) state->department_pos.emplace(d.departments[i].id, i);
  for (std::size_t i = 0; i < d.cases.size(); ++i) state->case_pos.emplace(d.cases[i].id, i);
  for (std::size_t i = 0; i < d.classes.size(); ++i) state->class_pos.emplace(d.classes[i].name, i);
  for (const auto& [term, concepts] : d.lexicon) {
    for (const auto& k : concepts) state->terms_by_concept[k].push_back(term);
  }
  state->fingerprint = sha256_hex(serialize_kb(d));
  return KnowledgeBase(std::move(state));
}

const std::vector<ClassDef>& KnowledgeBase::classes() const { return state_->doc.classes; }
const std::set<ConceptId>& KnowledgeBase::concepts() const { return state_->doc.concepts; }
const std::vector<Department>& KnowledgeBase::departments() const { return state_->doc.departments; }
const std::vector<Employee>& KnowledgeBase::employees() const { return state_->doc.employees; }
const std::vector<Case>& KnowledgeBase::cases() const { return state_->doc.cases; }
const Lexicon& KnowledgeBase::lexicon() const { return state_->doc.lexicon; }
const ConceptIndex& KnowledgeBase::index() const { return state_->index; }
const KbDocument& KnowledgeBase::document() const { return state_->doc; }
const std::string& KnowledgeBase::fingerprint() const { return state_->fingerprint; }

namespace {
template <typename T>
const T* find_in(const std::unordered_map<std::string_view, std::size_t>& pos, const std::vector<T>& items,
                 std::string_view key) {
  auto it = pos.find(key);
  return it == pos.end() ? nullptr : &items[it->second];
}
}  // namespace

const Employee* KnowledgeBase::find_employee(std::string_view id) const {
  return find_in(state_->employee_pos, state_->doc.employees, id);
}
const Department* KnowledgeBase::find_department(std::string_view id) const {
  return find_in(state_->department_pos, state_->doc.departments, id);
}
const Case* KnowledgeBase::find_case(std::string_view id) const {
  return find_in(state_->case_pos, state_->doc.cases, id);
}
const ClassDef* KnowledgeBase::find_class(std::string_view name) const {
  return find_in(state_->class_pos, state_->doc.classes, name);
}

std::span<const std::string_view> KnowledgeBase::terms_containing(std::string_view concept_id) const {
  auto it = state_->terms_by_concept.find(concept_id);
  if (it == state_->terms_by_concept.end()) return {};
  return it->second;
}

Vocabulary KnowledgeBase::vocabulary() const { return Vocabulary(*this); }

bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
  const KbDocument& x = a.document();
  const KbDocument& y = b.document();
  return x.classes == y.classes && x.concepts == y.concepts && x.departments == y.departments &&
         x.employees == y.employees && x.cases == y.cases && x.lexicon == y.lexicon &&
         a.index() == b.index();
}

bool Vocabulary::has_concept(std::string_view id) const {
  return kb_->concepts().contains(std::string(id));
}

std::set<ConceptId> Vocabulary::siblings(const ConceptId& concept_id) const {
  std::set<ConceptId> out;
  const Lexicon& lexicon = kb_->lexicon();
  for (std::string_view term : kb_->terms_containing(concept_id)) {
    const auto& concepts = lexicon.find(std::string(term))->second;
    out.insert(concepts.begin(), concepts.end());
  }
  out.erase(concept_id);
  return out;
}

std::set<ConceptId> lookup_concepts(const Vocabulary& vocab, std::string_view term) {
  const Lexicon& lexicon = vocab.lexicon();
  auto hit = [&](std::string_view t) -> const std::set<ConceptId>* {
    auto it = lexicon.find(std::string(t));
    return it == lexicon.end() ? nullptr : &it->second;
  };
  if (const auto* exact = hit(term)) return *exact;

  static constexpr std::string_view kSuffixes[] = {"es", "s", "ing"};
  static constexpr std::size_t kMinStem = 3;
  for (std::string_view suffix : kSuffixes) {
    if (term.size() < suffix.size() + kMinStem || !term.ends_with(suffix)) continue;
    if (const auto* stemmed = hit(term.substr(0, term.size() - suffix.size()))) return *stemmed;
  }
  return {};
}

std::set<ConceptId> lookup_concepts(const KnowledgeBase& kb, std::string_view term) {
  return lookup_concepts(kb.vocabulary(), term);
}

bool subclass_of(const KnowledgeBase& kb, std::string_view a, std::string_view b) {
  const ClassDef* cur = kb.find_class(a);
  if (!cur) throw UnknownClass(std::string(a));
  if (!kb.find_class(b)) throw UnknownClass(std::string(b));
  // The hierarchy is a validated forest, so the walk terminates.
  while (true) {
    if (cur->name == b) return true;
    if (!cur->parent) return false;
    cur = kb.find_class(*cur->parent);
  }
}

}  // namespace ontosearch
