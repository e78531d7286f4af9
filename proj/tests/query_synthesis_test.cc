#include <gtest/gtest.h>

#include <thread>

#include "corbfuzz/query_synthesis.h"
#include "corbfuzz/sql.h"
#include "reference_sql.h"

namespace corbfuzz::synth {
namespace {

constexpr const char* kPinnedQuery = "SELECT * FROM A WHERE A.c = 1";

TEST(AddTest, FirstCallPopulatesCacheOnly) {
  QuerySynthesizer qs;
  EXPECT_EQ(qs.Add(kPinnedQuery, 5), nullptr);
  EXPECT_EQ(qs.FieldsOf(kPinnedQuery),
            (std::vector<sql::FieldRef>{{"a", "c"}}));
  ASSERT_TRUE(qs.MaxRowOf(kPinnedQuery));
  EXPECT_EQ(*qs.MaxRowOf(kPinnedQuery), std::nullopt);  // unbounded
  EXPECT_EQ(qs.TablesOf(kPinnedQuery), std::vector<std::string>{"a"});
}

TEST(AddTest, RepeatIsCacheHit) {
  QuerySynthesizer qs;
  qs.Add(kPinnedQuery, 5);
  auto first = qs.Rows(kPinnedQuery, 5);
  auto again = qs.Add(kPinnedQuery, 5);
  ASSERT_NE(again, nullptr);
  EXPECT_EQ(again, first);
  EXPECT_EQ(qs.Rows(kPinnedQuery, 5), first);
}

TEST(AddTest, SeedsIndexDifferentStates) {
  QuerySynthesizer qs;
  std::set<std::uint64_t> digests;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    digests.insert(qs.Field(kPinnedQuery, seed, "a")->digest);
  EXPECT_GT(digests.size(), 1u);
}

TEST(AddTest, SameSeedSameResultAcrossSynthesizers) {
  QuerySynthesizer a;
  QuerySynthesizer b;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto ra = a.Field(kPinnedQuery, seed, "a");
    auto rb = b.Field(kPinnedQuery, seed, "a");
    EXPECT_EQ(ra->rows, rb->rows);
    EXPECT_EQ(ra->types, rb->types);
  }
}

TEST(FieldTest, PinnedColumnExample) {
  QuerySynthesizer qs;
  for (std::uint64_t seed = 1; seed < 40; ++seed) {
    auto r = qs.Field(kPinnedQuery, seed, "a");
    ValueType type = r->types.at("a#a");
    for (size_t row = 0; row < r->size(); ++row) {
      EXPECT_EQ(r->Get(row, "c"), Value(1));
      ASSERT_TRUE(r->Get(row, "a"));
      EXPECT_EQ(r->Get(row, "a")->type(), type);
    }
    EXPECT_EQ(r->size(), seed % 9);
  }
}

TEST(FieldTest, ZeroRowsReadAsNull) {
  QuerySynthesizer qs;
  auto r = qs.Field(kPinnedQuery, 18, "a");  // 18 mod 9 == 0
  EXPECT_EQ(r->size(), 0u);
  EXPECT_EQ(r->Get(0, "a"), std::nullopt);
}

TEST(FieldTest, FreshSeedsGiveDistinctResults) {
  QuerySynthesizer qs;
  const std::string q = "SELECT t.a FROM t WHERE t.a > 0";
  std::set<std::uint64_t> digests;
  // Same len (1) and the same pinned type for every seed.
  for (std::uint64_t seed = 1; seed < 200; seed += 9) {
    auto r = qs.Rows(q, seed);
    ASSERT_EQ(r->size(), 1u);
    EXPECT_TRUE(digests.insert(r->digest).second) << seed;
  }
}

TEST(FieldTest, PinnedSingletonExhaustsThenAborts) {
  QuerySynthesizer qs;
  const std::string q = "SELECT t.a FROM t WHERE t.a = 3 LIMIT 1";
  EXPECT_EQ(qs.Rows(q, 1)->size(), 1u);
  EXPECT_EQ(qs.Rows(q, 2)->size(), 0u);
  EXPECT_EQ(qs.Rows(q, 4)->size(), 0u);  // empty results never conflict
  EXPECT_THROW(qs.Rows(q, 3), SynthesisAbort);
}

TEST(FieldTest, WildcardGrowsFieldSetMonotonically) {
  QuerySynthesizer qs;
  const std::string q = "SELECT * FROM t";
  qs.Add(q, 3);
  EXPECT_TRUE(qs.FieldsOf(q).empty());
  auto first = qs.Field(q, 3, "x");
  auto second = qs.Field(q, 3, "y");
  EXPECT_EQ(qs.FieldsOf(q).size(), 2u);
  ASSERT_EQ(first->size(), second->size());
  for (size_t row = 0; row < first->size(); ++row)
    EXPECT_EQ(first->Get(row, "x"), second->Get(row, "x"));
  qs.Field(q, 3, "x");
  EXPECT_EQ(qs.FieldsOf(q).size(), 2u);
}

TEST(FieldTest, UnknownNameOfExplicitProjectionIsNull) {
  QuerySynthesizer qs;
  const std::string q = "SELECT t.a FROM t";
  auto r = qs.Field(q, 4, "zzz");
  EXPECT_EQ(qs.FieldsOf(q).size(), 1u);
  EXPECT_EQ(r->Get(0, "zzz"), std::nullopt);
}

TEST(FieldTest, CountQuery) {
  QuerySynthesizer qs;
  const std::string q = "SELECT count(t.id) FROM t WHERE t.id > 2";
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = qs.Rows(q, seed);
    ASSERT_EQ(r->size(), 1u);
    Value n = *r->Get(0, "count(id)");
    ASSERT_TRUE(n.is_int());
    ASSERT_EQ(r->tables.at("t").rows.size(), static_cast<size_t>(n.as_int()));
    EXPECT_EQ(testing::ReplayMismatch(q, *r), "");
  }
}

TEST(NotifyTest, HintAddsWeight) {
  QuerySynthesizer qs;
  const std::string q = "SELECT * FROM t";
  qs.Add(q, 1);
  qs.Field(q, 1, "a");
  qs.Notify(q, "a", ValueType::kInt);
  auto domain = qs.DomainOf(q, {"t", "a"});
  ASSERT_TRUE(domain);
  EXPECT_EQ(domain->weight(ValueType::kInt), 1u + 4u);
  EXPECT_EQ(domain->weight(ValueType::kStr), 1u);
}

TEST(NotifyTest, PinnedFieldIgnoresHints) {
  QuerySynthesizer qs;
  qs.Add(kPinnedQuery, 1);
  for (int i = 0; i < 10; ++i)
    qs.Notify(kPinnedQuery, "c", ValueType::kStr);
  for (std::uint64_t seed = 1; seed < 30; ++seed)
    EXPECT_EQ(qs.Field(kPinnedQuery, seed, "a")->types.at("a#c"),
              ValueType::kInt);
}

TEST(NotifyTest, NullAndDisabledHintsAreIgnored) {
  QuerySynthOptions options;
  options.type_inference = false;
  QuerySynthesizer qs(options);
  const std::string q = "SELECT * FROM t";
  qs.Field(q, 1, "a");
  qs.Notify(q, "a", ValueType::kInt);
  EXPECT_EQ(qs.DomainOf(q, {"t", "a"})->weight(ValueType::kInt), 1u);

  QuerySynthesizer enabled;
  enabled.Field(q, 1, "a");
  enabled.Notify(q, "a", ValueType::kNull);
  EXPECT_EQ(enabled.DomainOf(q, {"t", "a"})->weight(ValueType::kInt), 1u);
}

// Pearson statistic for observed counts against expected proportions.
double ChiSquare(const std::map<ValueType, int>& observed,
                 const std::map<ValueType, double>& proportion, int n) {
  double stat = 0;
  for (const auto& [type, p] : proportion) {
    double expected = p * n;
    double diff = (observed.count(type) ? observed.at(type) : 0) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

TEST(NotifyTest, SamplingFollowsWeights) {
  TypeDomain domain(1);
  for (int i = 0; i < 10; ++i)
    domain.AddWeight(ValueType::kInt, 4);
  Rng rng(99);
  std::map<ValueType, int> counts;
  const int n = 1000;
  for (int i = 0; i < n; ++i)
    ++counts[domain.Sample(rng)];
  EXPECT_GT(counts[ValueType::kInt], counts[ValueType::kStr]);
  // 41 : 1 : 1; critical value for 2 degrees of freedom at p = 0.001.
  double stat = ChiSquare(counts,
                          {{ValueType::kInt, 41.0 / 43},
                           {ValueType::kStr, 1.0 / 43},
                           {ValueType::kBool, 1.0 / 43}},
                          n);
  EXPECT_LT(stat, 13.82);
}

TEST(NotifyTest, UniformPriorIsUniform) {
  TypeDomain domain(1);
  Rng rng(5);
  std::map<ValueType, int> counts;
  const int n = 3000;
  for (int i = 0; i < n; ++i)
    ++counts[domain.Sample(rng)];
  double third = 1.0 / 3;
  EXPECT_LT(ChiSquare(counts,
                      {{ValueType::kInt, third},
                       {ValueType::kStr, third},
                       {ValueType::kBool, third}},
                      n),
            13.82);
}

TEST(NotifyTest, HintsShiftSynthesizedTypes) {
  QuerySynthesizer qs;
  const std::string q = "SELECT * FROM t";
  qs.Field(q, 0, "a");
  for (int i = 0; i < 10; ++i)
    qs.Notify(q, "a", ValueType::kInt);
  std::map<ValueType, int> counts;
  for (std::uint64_t seed = 1; seed <= 300; ++seed)
    ++counts[qs.Field(q, seed, "a")->types.at("t#a")];
  EXPECT_GT(counts[ValueType::kInt], counts[ValueType::kStr] * 5);
}

TEST(SampleWeightedTest, ZeroWeightsNeverChosen) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    EXPECT_EQ(SampleWeighted({{ValueType::kInt, 0}, {ValueType::kStr, 3}}, rng),
              ValueType::kStr);
  }
}

TEST(ReplayTest, GeneratedQueriesReplayExactly) {
  Rng rng(2024);
  QuerySynthesizer qs;
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    std::string q = testing::GenerateQuery(rng);
    std::uint64_t seed = rng.Next() & 0xffffffffu;
    try {
      auto r = qs.Rows(q, seed);
      EXPECT_EQ(testing::ReplayMismatch(q, *r), "");
      ++checked;
    } catch (const SynthesisAbort&) {
    }
  }
  EXPECT_GT(checked, 240);
}

TEST(ReplayTest, HarnessDetectsTampering) {
  QuerySynthesizer qs;
  const std::string q = "SELECT t.a, t.b FROM t WHERE t.a > 3";
  ResultSet r = *qs.Rows(q, 4);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(testing::ReplayMismatch(q, r), "");
  r.rows[0][0] = Value(-100);
  EXPECT_NE(testing::ReplayMismatch(q, r), "");
}

TEST(ReplayTest, SetOperatorsProduceDistinctRows) {
  QuerySynthesizer qs;
  const std::string q =
      "SELECT t.a FROM t WHERE t.a > 0 UNION SELECT u.b FROM u WHERE u.b < 100";
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto r = qs.Rows(q, seed);
    std::set<std::vector<Value>> unique(r->rows.begin(), r->rows.end());
    EXPECT_EQ(unique.size(), r->rows.size());
    EXPECT_EQ(testing::ReplayMismatch(q, *r), "");
  }
}

TEST(ConcurrencyTest, ParallelRequestsAgreeOnResults) {
  QuerySynthesizer qs;
  std::vector<std::shared_ptr<const ResultSet>> seen(8 * 50);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (std::uint64_t seed = 0; seed < 50; ++seed)
        seen[t * 50 + seed] = qs.Field(kPinnedQuery, seed, "a");
    });
  }
  for (std::thread& t : threads)
    t.join();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto canonical = qs.Rows(kPinnedQuery, seed);
    for (int t = 0; t < 8; ++t)
      EXPECT_EQ(seen[t * 50 + seed]->rows, canonical->rows);
  }
}

}  // namespace
}  // namespace corbfuzz::synth
