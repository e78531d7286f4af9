#include <gtest/gtest.h>

#include "corbfuzz/sql.h"

namespace corbfuzz::sql {
namespace {

TEST(ParseSqlTest, Examples) {
  EXPECT_EQ(ParseSql("SELECT * FROM A WHERE A.c = 1").ToString(),
            "SELECT_{(= a#c 1)}(a)");
  EXPECT_EQ(ParseSql("SELECT a FROM t LIMIT 3").ToString(),
            "LIMIT_3(PROJECT_{t.a}(t))");
  EXPECT_THROW(ParseSql("DROP TABLE x"), UnsupportedSql);
}

TEST(ParseSqlTest, RejectsOutsideFragment) {
  EXPECT_THROW(ParseSql("SELECT a FROM t, u"), UnsupportedSql);
  EXPECT_THROW(ParseSql("SELECT a FROM t UNION SELECT a FROM t"), UnsupportedSql);
  EXPECT_THROW(ParseSql("SELECT * FROM t UNION SELECT * FROM u"), UnsupportedSql);
  EXPECT_THROW(ParseSql("SELECT a FROM t UNION SELECT b, c FROM u"),
               UnsupportedSql);
  EXPECT_THROW(ParseSql("SELECT a FROM t WHERE x.a = 1"), UnsupportedSql);
  EXPECT_THROW(ParseSql("SELECT a FROM t GROUP BY a"), UnsupportedSql);
  EXPECT_THROW(ParseSql("SELECT a FROM t WHERE a = \"x\""), UnsupportedSql);
}

TEST(ParseSqlTest, AliasesAndKeywordsAreCaseInsensitive) {
  RelAlgExpr ra = ParseSql("select U.Name as n from Users u where u.ID >= 2;");
  EXPECT_EQ(Tables(ra), std::vector<std::string>{"users"});
  std::optional<SelectCore> core = DescribeCore(ra);
  ASSERT_TRUE(core);
  EXPECT_EQ(core->table, "users");
  ASSERT_EQ(core->outputs.size(), 1u);
  EXPECT_EQ(core->outputs[0].first, "n");
  EXPECT_EQ(core->outputs[0].second, (FieldRef{"users", "name"}));
}

TEST(MaxRowTest, Examples) {
  EXPECT_EQ(MaxRow(ParseSql("SELECT * FROM A WHERE A.c = 1")), std::nullopt);
  EXPECT_EQ(MaxRow(ParseSql("SELECT * FROM t LIMIT 5")), 5u);
  EXPECT_EQ(MaxRow(ParseSql(
                "(SELECT a FROM t LIMIT 2) UNION (SELECT b FROM u LIMIT 3)")),
            5u);
}

TEST(MaxRowTest, SetOperatorsAndNestedLimits) {
  EXPECT_EQ(MaxRow(ParseSql(
                "(SELECT a FROM t LIMIT 2) INTERSECT (SELECT b FROM u LIMIT 3)")),
            2u);
  EXPECT_EQ(MaxRow(ParseSql("(SELECT a FROM t LIMIT 2) UNION SELECT b FROM u")),
            std::nullopt);
  EXPECT_EQ(MaxRow(ParseSql("(SELECT a FROM t LIMIT 4) UNION SELECT b FROM u "
                            "LIMIT 3")),
            3u);
  EXPECT_EQ(MaxRow(ParseSql("SELECT count(a) FROM t")), 1u);
}

TEST(FieldsTest, Examples) {
  EXPECT_EQ(Fields(ParseSql("SELECT * FROM A WHERE A.c = 1")),
            (std::set<FieldRef>{{"a", "c"}}));
  EXPECT_EQ(Fields(ParseSql("SELECT a, b FROM t")),
            (std::set<FieldRef>{{"t", "a"}, {"t", "b"}}));
  EXPECT_TRUE(Fields(ParseSql("SELECT * FROM t")).empty());
}

TEST(ConstraintsTest, PinsComparedFields) {
  std::map<FieldRef, ValueType> pins;
  Formula f = Constraints(ParseSql("SELECT * FROM A WHERE A.c = 1"), &pins);
  EXPECT_EQ(f, Formula::Cmp(Term::Var("a#c"), CmpOp::kEq, Term::Lit(Value(1))));
  EXPECT_EQ(pins.at({"a", "c"}), ValueType::kInt);
  EXPECT_EQ(Constraints(ParseSql("SELECT * FROM t")), Formula::True());
}

TEST(ConstraintsTest, DisjunctionAcceptsExactlyTheIntendedRows) {
  std::map<FieldRef, ValueType> pins;
  Formula f = Constraints(
      ParseSql("SELECT * FROM t WHERE (x = 'u' OR x = 'v') AND y > 2"), &pins);
  std::vector<const Formula*> atoms;
  f.CollectAtoms(atoms);
  EXPECT_EQ(atoms.size(), 3u);
  EXPECT_EQ(pins.at({"t", "x"}), ValueType::kStr);
  EXPECT_EQ(pins.at({"t", "y"}), ValueType::kInt);
  for (const Value& x : {Value("u"), Value("v"), Value("w"), Value(""), Value(1)}) {
    for (std::int64_t y = -2; y <= 6; ++y) {
      bool expected =
          x.is_str() && (x.as_str() == "u" || x.as_str() == "v") && y > 2;
      EXPECT_EQ(f.Evaluate({{"t#x", x}, {"t#y", Value(y)}}), expected)
          << x.DebugString() << " " << y;
    }
  }
}

TEST(ConstraintsTest, CountPinsOutputToInt) {
  std::map<FieldRef, ValueType> pins;
  Constraints(ParseSql("SELECT count(id) AS n FROM t"), &pins);
  EXPECT_EQ(pins.at({"t", "n"}), ValueType::kInt);
}

TEST(ParseSqlTest, SetOperatorDetection) {
  EXPECT_FALSE(HasSetOperator(ParseSql("SELECT a FROM t")));
  EXPECT_TRUE(HasSetOperator(ParseSql("SELECT a FROM t INTERSECT SELECT b FROM u")));
  EXPECT_EQ(Tables(ParseSql("SELECT a FROM t UNION SELECT b FROM u")),
            (std::vector<std::string>{"t", "u"}));
}

}  // namespace
}  // namespace corbfuzz::sql
