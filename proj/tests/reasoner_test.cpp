#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ontosearch/reasoner.hpp"
#include "support/naive_search.hpp"
#include "support/instances.hpp"

namespace ontosearch {
namespace {

Case make_case(std::string id, std::string employee, std::set<ConceptId> concepts, double factor, std::int64_t peers,
               std::optional<std::string> dept = std::nullopt) {
  Case c;
  c.id = std::move(id);
  c.employee_id = std::move(employee);
  c.concepts = std::move(concepts);
  c.factor = factor;
  c.peers = peers;
  c.department_id = std::move(dept);
  return c;
}

SemanticQuery make_query(std::map<ConceptId, double> concepts, std::optional<std::string> dept = std::nullopt) {
  SemanticQuery sq;
  sq.concepts = std::move(concepts);
  sq.department_key = std::move(dept);
  return sq;
}

// c1(e7,{invoice,approve,payment},f=0.9,p=3), c2(e9,{invoice},f=1.0,p=0).
KnowledgeBase two_case_kb() {
  KbDocument doc;
  doc.concepts = {"invoice", "approve", "payment"};
  doc.departments = {{"finance", "Finance", {}}};
  doc.employees = {{"e7", "Ivana Todorova", "+359 2 555 1049", "ivana@corp.example", "Accounts Payable Lead", "finance"},
                   {"e9", "Radka Vasileva", "+359 2 555 1063", "radka@corp.example", "Billing Clerk", "finance"}};
  doc.cases = {make_case("c1", "e7", {"invoice", "approve", "payment"}, 0.9, 3),
               make_case("c2", "e9", {"invoice"}, 1.0, 0)};
  for (const auto& k : doc.concepts) doc.lexicon[k] = {k};
  return KnowledgeBase::from_document(doc);
}

TEST(Similarity, FullCoverage) {
  EXPECT_DOUBLE_EQ(similarity(make_query({{"invoice", 1}, {"approve", 1}}),
                              make_case("c", "e", {"invoice", "approve", "payment"}, 1, 0)),
                   1.0);
}

TEST(Similarity, HalfTheWeightMass) {
  EXPECT_DOUBLE_EQ(similarity(make_query({{"invoice", 1}, {"approve", 1}}), make_case("c", "e", {"invoice"}, 1, 0)),
                   0.5);
}

TEST(Similarity, WeightedCoverage) {
  EXPECT_NEAR(similarity(make_query({{"invoice", 1}, {"payment", 0.5}}), make_case("c", "e", {"payment"}, 1, 0)),
              0.5 / 1.5, 1e-9);
}

TEST(Similarity, EmptyQueryThrows) {
  EXPECT_THROW(similarity(make_query({}), make_case("c", "e", {"invoice"}, 1, 0)), EmptyQueryConcepts);
}

TEST(Confidence, Examples) {
  const ScoringParams p;
  EXPECT_NEAR(confidence(make_case("c", "e", {"x"}, 0.9, 3), p), 1.08, 1e-12);
  EXPECT_DOUBLE_EQ(confidence(make_case("c", "e", {"x"}, 1.0, 0), p), 1.0);
  EXPECT_DOUBLE_EQ(confidence(make_case("c", "e", {"x"}, 0.5, 0), p), 0.5);
}

TEST(ScoreCase, Compositions) {
  const ScoringParams p;
  const Case c1 = make_case("c1", "e7", {"invoice", "approve", "payment"}, 0.9, 3, "finance");
  ScoredCase s = score_case(make_query({{"invoice", 1}, {"approve", 1}}), c1, p);
  EXPECT_NEAR(s.score, 1.08, 1e-12);
  EXPECT_EQ(s.matched_concepts, (std::set<ConceptId>{"approve", "invoice"}));
  EXPECT_DOUBLE_EQ(s.score, s.similarity * s.confidence * s.department_modifier);

  const Case half = make_case("c2", "e1", {"invoice"}, 1.0, 0, "finance");
  s = score_case(make_query({{"invoice", 1}, {"approve", 1}}, "finance"), half, p);
  EXPECT_DOUBLE_EQ(s.score, 0.625);

  s = score_case(make_query({{"invoice", 1}, {"approve", 1}}, "sales"), half, p);
  EXPECT_DOUBLE_EQ(s.score, 0.375);

  ScoringParams hard = p;
  hard.hard_department_filter = true;
  EXPECT_EQ(score_case(make_query({{"invoice", 1}}, "sales"), half, hard).score, 0.0);

  // Department modifier is neutral when either side has no department.
  EXPECT_DOUBLE_EQ(score_case(make_query({{"invoice", 1}}, "sales"), make_case("c", "e", {"invoice"}, 1, 0), p).score,
                   1.0);
}

TEST(ScoringParams, Bounds) {
  EXPECT_TRUE(ScoringParams{}.violations().empty());
  ScoringParams p;
  p.lambda_peer = -0.1;
  p.dept_match_boost = 0.0;
  p.dept_mismatch_penalty = 1.5;
  p.threshold = -1;
  p.expansion_weight = 0;
  EXPECT_EQ(p.violations().size(), 5u);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Search, TwoCaseExample) {
  const KnowledgeBase kb = two_case_kb();
  const SemanticQuery sq = make_query({{"invoice", 1}, {"approve", 1}});
  const auto results = search(kb, sq, ScoringParams{});
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].employee_id, "e7");
  EXPECT_NEAR(results[0].score, 1.08, 1e-9);
  EXPECT_EQ(results[1].employee_id, "e9");
  EXPECT_NEAR(results[1].score, 0.5, 1e-9);
  EXPECT_EQ(results[0].full_name, "Ivana Todorova");
  EXPECT_EQ(results[0].position_title, "Accounts Payable Lead");
  EXPECT_EQ(results[0].best_case.case_id, "c1");
  EXPECT_DOUBLE_EQ(results[0].factor, 0.9);
  EXPECT_EQ(results[0].peers, 3);
  EXPECT_NE(results[0].explanation.find("peers 3"), std::string::npos);

  // The brute-force oracle agrees.
  const auto oracle = testing::naive_search(kb.document(), sq, ScoringParams{}, 10);
  ASSERT_EQ(oracle.size(), 2u);
  EXPECT_EQ(oracle[0].employee_id, "e7");
  EXPECT_NEAR(oracle[0].score, 1.08, 1e-9);
}

TEST(Search, ThresholdCut) {
  ScoringParams p;
  p.threshold = 0.6;
  const auto results = search(two_case_kb(), make_query({{"invoice", 1}, {"approve", 1}}), p);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].employee_id, "e7");
}

TEST(Search, NoConceptsNoResults) {
  EXPECT_TRUE(search(two_case_kb(), make_query({}), ScoringParams{}).empty());
}

TEST(Search, TruncatesAndBreaksTiesById) {
  KbDocument doc;
  doc.concepts = {"x"};
  doc.departments = {{"d", "D", {}}};
  for (const char* id : {"e3", "e1", "e2"}) doc.employees.push_back({id, "N", "P", "a@b", "T", "d"});
  doc.cases = {make_case("c1", "e3", {"x"}, 0.5, 0), make_case("c2", "e1", {"x"}, 0.5, 0),
               make_case("c3", "e2", {"x"}, 0.5, 0)};
  const KnowledgeBase kb = KnowledgeBase::from_document(doc);
  const auto results = search(kb, make_query({{"x", 1}}), ScoringParams{}, 2);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].employee_id, "e1");
  EXPECT_EQ(results[1].employee_id, "e2");
}

TEST(Search, BestCasePerEmployee) {
  KbDocument doc;
  doc.concepts = {"x", "y"};
  doc.departments = {{"d", "D", {}}};
  doc.employees = {{"e1", "N", "P", "a@b", "T", "d"}};
  doc.cases = {make_case("c1", "e1", {"x"}, 0.4, 0), make_case("c2", "e1", {"x", "y"}, 0.8, 0)};
  const KnowledgeBase kb = KnowledgeBase::from_document(doc);
  const auto results = search(kb, make_query({{"x", 1}, {"y", 1}}), ScoringParams{});
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].best_case.case_id, "c2");
  EXPECT_DOUBLE_EQ(results[0].score, 0.8);
}

TEST(Search, HardFilterDropsZeroScoresEvenAtZeroThreshold) {
  KbDocument doc;
  doc.concepts = {"x"};
  doc.departments = {{"d", "D", {}}, {"f", "F", {}}};
  doc.employees = {{"e1", "N", "P", "a@b", "T", "d"}};
  doc.cases = {make_case("c1", "e1", {"x"}, 1.0, 0, "d")};
  const KnowledgeBase kb = KnowledgeBase::from_document(doc);
  ScoringParams p;
  p.hard_department_filter = true;
  p.threshold = 0.0;
  EXPECT_TRUE(search(kb, make_query({{"x", 1}}, "f"), p).empty());
}

// --- properties -----------------------------------------------------------

using testing::Instance;
using testing::pick_live_case;
using testing::position_of;
using testing::random_instance;

TEST(SearchProperty, FactorMonotonicity) {
  testing::Generator gen(0xfac7);
  int checked = 0;
  while (checked < 1000) {
    Instance in = random_instance(gen);
    const auto live = pick_live_case(gen, in);
    if (live < 0) continue;
    const auto pos = static_cast<std::size_t>(live);
    const double f1 = gen.uniform_real(0.01, 0.99);
    const double f2 = gen.uniform_real(f1 + 1e-6, 1.0);

    in.doc.cases[pos].factor = f1;
    const KnowledgeBase low = KnowledgeBase::from_document(in.doc);
    in.doc.cases[pos].factor = f2;
    const KnowledgeBase high = KnowledgeBase::from_document(in.doc);

    const Case& c = in.doc.cases[pos];
    ASSERT_GT(score_case(in.sq, *high.find_case(c.id), in.params).score,
              score_case(in.sq, *low.find_case(c.id), in.params).score);
    const auto before = search(low, in.sq, in.params, in.limit);
    const auto after = search(high, in.sq, in.params, in.limit);
    const auto p1 = position_of(before, c.employee_id);
    const auto p2 = position_of(after, c.employee_id);
    if (p1 >= 0) {
      ASSERT_GE(p2, 0);
      ASSERT_LE(p2, p1);
    }
    ++checked;
  }
}

TEST(SearchProperty, PeerMonotonicity) {
  testing::Generator gen(0x9ee7);
  int checked = 0;
  while (checked < 1000) {
    Instance in = random_instance(gen);
    const auto live = pick_live_case(gen, in);
    if (live < 0) continue;
    const auto pos = static_cast<std::size_t>(live);
    const int p1 = gen.uniform(0, 30);
    const int p2 = gen.uniform(p1 + 1, 60);

    in.doc.cases[pos].peers = p1;
    const KnowledgeBase low = KnowledgeBase::from_document(in.doc);
    in.doc.cases[pos].peers = p2;
    const KnowledgeBase high = KnowledgeBase::from_document(in.doc);

    const Case& c = in.doc.cases[pos];
    const double s1 = score_case(in.sq, *low.find_case(c.id), in.params).score;
    const double s2 = score_case(in.sq, *high.find_case(c.id), in.params).score;
    if (in.params.lambda_peer > 0.0) ASSERT_GT(s2, s1);
    else ASSERT_GE(s2, s1);
    const auto before = search(low, in.sq, in.params, in.limit);
    const auto after = search(high, in.sq, in.params, in.limit);
    const auto r1 = position_of(before, c.employee_id);
    const auto r2 = position_of(after, c.employee_id);
    if (r1 >= 0) {
      ASSERT_GE(r2, 0);
      ASSERT_LE(r2, r1);
    }
    ++checked;
  }
}

TEST(SearchProperty, CaseOrderPermutationInvariance) {
  testing::Generator gen(0x5407);
  for (int i = 0; i < 1000; ++i) {
    Instance in = random_instance(gen);
    const auto expected = search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit);
    std::shuffle(in.doc.cases.begin(), in.doc.cases.end(), gen.rng());
    ASSERT_EQ(search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit), expected) << i;
  }
}

TEST(SearchProperty, ScoresFiniteAndBounded) {
  testing::Generator gen(0xb0b0);
  for (int i = 0; i < 1000; ++i) {
    const Instance in = random_instance(gen);
    const KnowledgeBase kb = KnowledgeBase::from_document(in.doc);
    for (const auto& c : kb.cases()) {
      const ScoredCase s = score_case(in.sq, c, in.params);
      ASSERT_GE(s.similarity, 0.0);
      ASSERT_LE(s.similarity, 1.0);
      ASSERT_TRUE(std::isfinite(s.score));
      ASSERT_GE(s.score, 0.0);
    }
    const auto results = search(kb, in.sq, in.params, in.limit);
    ASSERT_LE(results.size(), in.limit);
    for (std::size_t j = 0; j < results.size(); ++j) {
      ASSERT_GE(results[j].score, in.params.threshold);
      ASSERT_GT(results[j].score, 0.0);
      ASSERT_FALSE(results[j].best_case.matched_concepts.empty());
      if (j > 0) ASSERT_GE(results[j - 1].score, results[j].score);
    }
  }
}

TEST(SearchProperty, Deterministic) {
  testing::Generator gen(0xde7e);
  for (int i = 0; i < 1000; ++i) {
    const Instance in = random_instance(gen);
    const KnowledgeBase kb = KnowledgeBase::from_document(in.doc);
    const auto first = search(kb, in.sq, in.params, in.limit);
    ASSERT_EQ(search(kb, in.sq, in.params, in.limit), first) << i;
    ASSERT_EQ(search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit), first) << i;
  }
}

TEST(SearchProperty, MatchesNaiveOracle) {
  testing::Generator gen(0x0fac1e);
  for (int i = 0; i < 1000; ++i) {
    const Instance in = random_instance(gen);
    const auto got = search(KnowledgeBase::from_document(in.doc), in.sq, in.params, in.limit);
    const auto want = testing::naive_search(in.doc, in.sq, in.params, in.limit);
    ASSERT_EQ(got.size(), want.size()) << i;
    for (std::size_t j = 0; j < got.size(); ++j) {
      ASSERT_EQ(got[j].employee_id, want[j].employee_id) << i;
      ASSERT_EQ(got[j].best_case.case_id, want[j].case_id) << i;
      ASSERT_NEAR(got[j].score, want[j].score, 1e-9) << i;
    }
  }
}

}  // namespace
}  // namespace ontosearch
