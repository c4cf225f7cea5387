#include "ontosearch/reasoner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace ontosearch {

std::vector<std::string> ScoringParams::violations() const {
  std::vector<std::string> out;
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(lambda_peer) || lambda_peer < 0.0) out.push_back("lambda_peer must be >= 0");
  if (!finite(dept_match_boost) || dept_match_boost <= 0.0) out.push_back("dept_match_boost must be > 0");
  if (!finite(dept_mismatch_penalty) || dept_mismatch_penalty <= 0.0 || dept_mismatch_penalty > 1.0) {
    out.push_back("dept_mismatch_penalty must lie in (0, 1]");
  }
  if (!finite(threshold) || threshold < 0.0) out.push_back("threshold must be >= 0");
  if (!finite(expansion_weight) || expansion_weight <= 0.0 || expansion_weight > 1.0) {
    out.push_back("expansion_weight must lie in (0, 1]");
  }
  return out;
}

void ScoringParams::validate() const {
  auto problems = violations();
  if (problems.empty()) return;
  std::string message = "invalid scoring parameters:";
  for (const auto& p : problems) message += " " + p + ";";
  throw std::invalid_argument(message);
}

double similarity(const SemanticQuery& sq, const Case& c) {
  if (sq.concepts.empty()) throw EmptyQueryConcepts();
  double matched = 0.0;
  double total = 0.0;
  for (const auto& [k, w] : sq.concepts) {
    total += w;
    if (c.concepts.contains(k)) matched += w;
  }
  return matched / total;
}

double confidence(const Case& c, const ScoringParams& params) {
  return c.factor * (1.0 + params.lambda_peer * std::log2(1.0 + static_cast<double>(c.peers)));
}

double department_modifier(const SemanticQuery& sq, const Case& c, const ScoringParams& params) {
  if (!sq.department_key || !c.department_id) return 1.0;
  if (*sq.department_key == *c.department_id) return params.dept_match_boost;
  return params.hard_department_filter ? 0.0 : params.dept_mismatch_penalty;
}

ScoredCase score_case(const SemanticQuery& sq, const Case& c, const ScoringParams& params) {
  ScoredCase out;
  out.case_id = c.id;
  out.similarity = similarity(sq, c);
  out.confidence = confidence(c, params);
  out.department_modifier = department_modifier(sq, c, params);
  out.score = out.similarity * out.confidence * out.department_modifier;
  for (const auto& [k, w] : sq.concepts) {
    if (c.concepts.contains(k)) out.matched_concepts.insert(k);
  }
  return out;
}

std::string explain(const ScoredCase& scored, const Case& c) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "case %s: similarity %.4f x confidence %.4f (factor %.2f, peers %lld) x department %.2f = %.4f",
                c.id.c_str(), scored.similarity, scored.confidence, c.factor,
                static_cast<long long>(c.peers), scored.department_modifier, scored.score);
  os << buf << "; matched:";
  for (const auto& k : scored.matched_concepts) os << ' ' << k;
  return os.str();
}

std::vector<SearchResult> search(const KnowledgeBase& kb, const SemanticQuery& sq,
                                 const ScoringParams& params, std::size_t limit) {
  if (sq.concepts.empty() || limit == 0) return {};

  std::set<std::string> candidates;
  const ConceptIndex& index = kb.index();
  for (const auto& [k, w] : sq.concepts) {
    if (auto it = index.find(k); it != index.end()) candidates.insert(it->second.begin(), it->second.end());
  }

  // employee id -> (best scored case, its case record)
  std::map<std::string, std::pair<ScoredCase, const Case*>> best;
  for (const auto& case_id : candidates) {
    const Case* c = kb.find_case(case_id);
    ScoredCase scored = score_case(sq, *c, params);
    auto [it, inserted] = best.try_emplace(c->employee_id, scored, c);
    // Candidates are visited in case-id order, so ties keep the smaller id.
    if (!inserted && scored.score > it->second.first.score) it->second = {std::move(scored), c};
  }

  std::vector<SearchResult> results;
  for (auto& [employee_id, entry] : best) {
    auto& [scored, c] = entry;
    if (!(scored.score > 0.0) || scored.score < params.threshold) continue;
    const Employee* e = kb.find_employee(employee_id);
    SearchResult r;
    r.employee_id = e->id;
    r.full_name = e->full_name;
    r.phone = e->phone;
    r.email = e->email;
    r.position_title = e->position_title;
    r.department_id = e->department_id;
    r.score = scored.score;
    r.factor = c->factor;
    r.peers = c->peers;
    r.explanation = explain(scored, *c);
    r.best_case = std::move(scored);
    results.push_back(std::move(r));
  }

  std::stable_sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.employee_id < b.employee_id;
  });
  if (results.size() > limit) results.resize(limit);
  return results;
}

}  // namespace ontosearch
