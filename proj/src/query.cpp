#include "ontosearch/query.hpp"

#include <algorithm>
#include <cctype>

namespace ontosearch {

namespace {

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

bool names_department(const Department& d, const std::string& phrase) {
  return lowercase_ascii(d.name) == phrase || d.aliases.contains(phrase);
}

const Department* department_for(const Vocabulary& vocab, const std::string& phrase) {
  for (const auto& d : vocab.departments()) {
    if (names_department(d, phrase)) return &d;
  }
  return nullptr;
}

}  // namespace

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words{
      "a",   "an", "the", "who", "whom", "what", "which", "how", "is", "are",
      "do",  "does", "can", "for", "of", "to", "in", "on", "at", "and",
      "or",  "i",  "me",  "my",  "we",  "our", "please"};
  return words;
}

std::vector<std::string> normalize(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) cleaned.push_back(' ');
    else cleaned.push_back(static_cast<char>(std::tolower(c)));
  }

  std::vector<std::string> tokens;
  const auto& stop = stopwords();
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
    if (j > i) {
      std::string token = cleaned.substr(i, j - i);
      if (!stop.contains(token)) tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

DepartmentMatch detect_department(const Vocabulary& vocab, std::span<const std::string> tokens) {
  DepartmentMatch match{std::nullopt, {tokens.begin(), tokens.end()}};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::size_t span_length = 0;
    const Department* found = nullptr;
    if (i + 1 < tokens.size()) {
      found = department_for(vocab, tokens[i] + " " + tokens[i + 1]);
      if (found) span_length = 2;
    }
    if (!found) {
      found = department_for(vocab, tokens[i]);
      if (found) span_length = 1;
    }
    if (found) {
      match.department_id = found->id;
      match.remaining.erase(match.remaining.begin() + static_cast<std::ptrdiff_t>(i),
                            match.remaining.begin() + static_cast<std::ptrdiff_t>(i + span_length));
      return match;
    }
  }
  return match;
}

void validate_raw_query(const Vocabulary& vocab, const RawQuery& raw) {
  if (is_blank(raw.text)) throw EmptyQuery();
  if (raw.k < 1) throw InvalidResultLimit();
  if (raw.department_filter && !vocab.find_department(*raw.department_filter)) {
    throw UnknownDepartment(*raw.department_filter);
  }
}

SemanticQuery build_semantic_query(const Vocabulary& vocab, const RawQuery& raw) {
  if (is_blank(raw.text)) throw EmptyQuery();

  SemanticQuery sq;
  sq.origin_text = raw.text;
  const std::vector<std::string> tokens = normalize(raw.text);

  std::vector<std::string> remaining;
  if (raw.department_filter) {
    sq.department_key = raw.department_filter;
    remaining = tokens;
  } else {
    DepartmentMatch detected = detect_department(vocab, tokens);
    sq.department_key = std::move(detected.department_id);
    remaining = std::move(detected.remaining);
  }

  for (const auto& token : remaining) {
    const std::set<ConceptId> hits = lookup_concepts(vocab, token);
    if (hits.empty()) {
      if (std::find(sq.unknown_terms.begin(), sq.unknown_terms.end(), token) == sq.unknown_terms.end()) {
        sq.unknown_terms.push_back(token);
      }
      continue;
    }
    for (const auto& k : hits) sq.concepts[k] = kDirectWeight;
  }
  return sq;
}

SemanticQuery build_semantic_query(const KnowledgeBase& kb, const RawQuery& raw) {
  return build_semantic_query(kb.vocabulary(), raw);
}

SemanticQuery expand_query(const Vocabulary& vocab, SemanticQuery sq, double expansion_weight) {
  if (!(expansion_weight > 0.0 && expansion_weight <= 1.0)) {
    throw std::invalid_argument("expansion weight must lie in (0, 1]");
  }
  std::vector<ConceptId> direct;
  for (const auto& [k, w] : sq.concepts) {
    if (!sq.expanded.contains(k)) direct.push_back(k);
  }
  for (const auto& k : direct) {
    for (const auto& sibling : vocab.siblings(k)) {
      auto [it, inserted] = sq.concepts.try_emplace(sibling, expansion_weight);
      if (inserted) {
        sq.expanded.insert(sibling);
      } else if (sq.expanded.contains(sibling) && it->second < expansion_weight) {
        it->second = expansion_weight;
      }
    }
  }
  return sq;
}

SemanticQuery expand_query(const KnowledgeBase& kb, SemanticQuery sq, double expansion_weight) {
  return expand_query(kb.vocabulary(), std::move(sq), expansion_weight);
}

}  // namespace ontosearch
