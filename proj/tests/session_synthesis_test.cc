#include <gtest/gtest.h>

#include "corbfuzz/rng.h"
#include "corbfuzz/session_synthesis.h"

namespace corbfuzz::synth {
namespace {

const ItemKey kUid{ItemKind::kSession, "uid"};
const ItemKey kRole{ItemKind::kSession, "role"};
const ItemKey kToken{ItemKind::kCookie, "token"};

TEST(ItemKeyTest, Names) {
  EXPECT_EQ(kUid.Name(), "session#uid");
  EXPECT_EQ(kToken.Name(), "cookie#token");
  EXPECT_EQ(kToken.PhiVar(), "cookie#token.phi");
  EXPECT_EQ(kToken.AlphaVar(), "cookie#token.alpha");
}

TEST(SessionContextTest, FreshContextIsEmpty) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 1234);
  EXPECT_TRUE(ctx.rcache().empty());
  EXPECT_EQ(ctx.bits_used(), 0);
  EXPECT_TRUE(ctx.trace().empty());
  EXPECT_EQ(SessionContext::kSeedBits, 32);
}

TEST(SessionContextTest, SeedZeroTakesFalseBranches) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 0);
  EXPECT_FALSE(ctx.IsSet(kUid));
  EXPECT_FALSE(ctx.Compare(kRole, CmpOp::kEq, Value("admin")));
  EXPECT_FALSE(ctx.IsSet(kToken));
  EXPECT_EQ(ctx.bits_used(), 3);
  for (const DecisionRecord& d : ctx.trace()) {
    EXPECT_FALSE(d.bit);
    EXPECT_TRUE(d.accepted);
  }
}

TEST(SessionContextTest, LowBitDecidesFirst) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 0b01);
  EXPECT_TRUE(ctx.IsSet(kUid));
  EXPECT_FALSE(ctx.IsSet(kToken));
  ASSERT_EQ(ctx.trace().size(), 2u);
  EXPECT_EQ(ctx.trace()[0].item, "session#uid");
  EXPECT_TRUE(ctx.trace()[0].bit);
}

TEST(SessionContextTest, SameSeedSameDecisions) {
  for (std::uint32_t seed : {7u, 0xdeadbeefu, 12345u}) {
    GlobalSessionCache a_cache;
    GlobalSessionCache b_cache;
    SessionContext a(&a_cache, seed);
    SessionContext b(&b_cache, seed);
    for (int i = 0; i < 5; ++i) {
      ItemKey item{ItemKind::kSession, "k" + std::to_string(i)};
      EXPECT_EQ(a.IsSet(item), b.IsSet(item));
      EXPECT_EQ(a.Compare(item, CmpOp::kGt, Value(i)),
                b.Compare(item, CmpOp::kGt, Value(i)));
      EXPECT_EQ(a.Concretize(item), b.Concretize(item));
    }
    EXPECT_EQ(a.bits_used(), b.bits_used());
  }
}

TEST(SessionContextTest, ConcretizeUnconstrainedItem) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 99);
  Value v = ctx.Concretize(kUid);
  EXPECT_EQ(cache.Lookup(99, kUid), v);
  EXPECT_EQ(ctx.concretized().count(kUid), 1u);
  // A later request under the same seed reads the cached value.
  SessionContext again(&cache, 99);
  EXPECT_EQ(again.Concretize(kUid), v);
  EXPECT_TRUE(again.concretized().empty());
}

TEST(SessionContextTest, ContradictoryBranchIsSkipped) {
  GlobalSessionCache cache;
  // Bits: 1 (x == 1 true), 1 (x == 2 true: UNSAT), 0 (x == 2 false).
  SessionContext ctx(&cache, 0b011);
  ItemKey x{ItemKind::kSession, "x"};
  EXPECT_TRUE(ctx.Compare(x, CmpOp::kEq, Value(1)));
  EXPECT_FALSE(ctx.Compare(x, CmpOp::kEq, Value(2)));
  ASSERT_EQ(ctx.trace().size(), 3u);
  EXPECT_TRUE(ctx.trace()[0].accepted);
  EXPECT_TRUE(ctx.trace()[1].bit);
  EXPECT_FALSE(ctx.trace()[1].accepted);
  EXPECT_FALSE(ctx.trace()[2].bit);
  EXPECT_TRUE(ctx.trace()[2].accepted);
  EXPECT_EQ(ctx.bits_used(), 3);
  EXPECT_EQ(ctx.Concretize(x), Value(1));
}

TEST(SessionContextTest, ExhaustedBitsAbort) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 0xffffffffu);
  ItemKey x{ItemKind::kSession, "x"};
  EXPECT_TRUE(ctx.Compare(x, CmpOp::kEq, Value(1)));
  EXPECT_THROW(ctx.Compare(x, CmpOp::kEq, Value(2)), SessionAbort);
  EXPECT_EQ(ctx.bits_used(), 32);
}

TEST(SessionContextTest, ConcretizationIsLazy) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 5);
  ctx.IsSet(kUid);
  ctx.Compare(kRole, CmpOp::kEq, Value("member"));
  EXPECT_EQ(cache.size(), 0u);
  ctx.Concretize(kRole);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(SessionContextTest, ConcreteValueHonoursDecisions) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    GlobalSessionCache cache;
    std::uint32_t seed = static_cast<std::uint32_t>(rng.Next());
    SessionContext ctx(&cache, seed);
    bool set = ctx.IsSet(kRole);
    bool admin = ctx.Compare(kRole, CmpOp::kEq, Value("admin"));
    Value v = ctx.Concretize(kRole);
    EXPECT_EQ(!v.is_null(), set) << seed;
    EXPECT_EQ(LooseCompare(v, CmpOp::kEq, Value("admin")), admin) << seed;
  }
}

TEST(SessionContextTest, CompareItemsConcretizesLeftSide) {
  GlobalSessionCache cache;
  SessionContext ctx(&cache, 0b1);
  ItemKey a{ItemKind::kSession, "a"};
  ItemKey b{ItemKind::kCookie, "b"};
  bool equal = ctx.CompareItems(a, CmpOp::kEq, b);
  EXPECT_EQ(ctx.concretized().count(a), 1u);
  EXPECT_EQ(ctx.concretized().count(b), 0u);
  Value left = *cache.Lookup(0b1, a);
  EXPECT_EQ(LooseCompare(left, CmpOp::kEq, ctx.Concretize(b)), equal);
}

TEST(SessionContextTest, CachedItemsSkipDecisions) {
  GlobalSessionCache cache;
  cache.Store(3, kUid, Value(42));
  SessionContext ctx(&cache, 3);
  EXPECT_TRUE(ctx.IsSet(kUid));
  EXPECT_TRUE(ctx.Compare(kUid, CmpOp::kEq, Value(42)));
  EXPECT_EQ(ctx.bits_used(), 0);
}

TEST(SessionContextTest, DisabledBehavesAsEmptySession) {
  GlobalSessionCache cache;
  SessionSynthOptions options;
  options.enabled = false;
  SessionContext ctx(&cache, 0xffffffffu, options);
  EXPECT_FALSE(ctx.IsSet(kUid));
  EXPECT_FALSE(ctx.Compare(kUid, CmpOp::kEq, Value(1)));
  EXPECT_TRUE(ctx.Compare(kUid, CmpOp::kNe, Value(1)));
  EXPECT_TRUE(ctx.Concretize(kUid).is_null());
  EXPECT_EQ(ctx.bits_used(), 0);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(SessionContextTest, ConstraintsStaySatisfiable) {
  Rng rng(3);
  const std::vector<Value> literals = {Value(0),    Value(3),    Value("a"),
                                       Value(true), Value(false), Value("")};
  const CmpOp ops[] = {CmpOp::kEq, CmpOp::kNe, CmpOp::kLt, CmpOp::kGe};
  for (int i = 0; i < 300; ++i) {
    GlobalSessionCache cache;
    SessionContext ctx(&cache, static_cast<std::uint32_t>(rng.Next()));
    try {
      for (int step = 0; step < 6; ++step) {
        ItemKey item{ItemKind::kSession, std::string(1, 'a' + rng.Below(2))};
        if (rng.Chance(1, 3))
          ctx.IsSet(item);
        else
          ctx.Compare(item, ops[rng.Below(4)], literals[rng.Below(6)]);
      }
    } catch (const SessionAbort&) {
    }
    EXPECT_TRUE(ctx.AllSatisfiable());
    EXPECT_LE(ctx.bits_used(), 32);
  }
}

TEST(GlobalSessionCacheTest, EntriesAreWriteOnce) {
  GlobalSessionCache cache;
  EXPECT_EQ(cache.Store(1, kUid, Value(5)), Value(5));
  EXPECT_EQ(cache.Store(1, kUid, Value(6)), Value(5));
  cache.Store(2, kUid, Value());
  EXPECT_EQ(cache.SolvedValues(kUid), (std::vector<Value>{Value(5), Value()}));
  EXPECT_EQ(cache.Lookup(3, kUid), std::nullopt);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(GlobalSessionCacheTest, SeedsGetVariedValues) {
  GlobalSessionCache cache;
  std::set<std::string> seen;
  for (std::uint32_t seed = 0; seed < 40; ++seed) {
    SessionContext ctx(&cache, seed * 2 + 1);  // low bit set: defined
    ASSERT_TRUE(ctx.IsSet(kUid));
    seen.insert(ctx.Concretize(kUid).DebugString());
  }
  EXPECT_GT(seen.size(), 10u);
}

}  // namespace
}  // namespace corbfuzz::synth
