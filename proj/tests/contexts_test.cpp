#include <gtest/gtest.h>

#include "magpi/magpi.hpp"

using namespace magpi;

namespace {

SessionType out(const char* q, const char* m) { return select_t({tarm(q, m, {}, end_t())}); }

std::size_t count_splits(const DeltaCtx& d) {
  std::size_t n = 0;
  auto splits = ctx_splits(d);
  for (auto it = splits.begin(); it != std::default_sentinel; ++it) ++n;
  return n;
}

}  // namespace

TEST(CtxAdd, DisjointIsUnion) {
  DeltaCtx a{{Role{"p"}, out("q", "m")}};
  DeltaCtx b{{Role{"q"}, end_t()}};
  auto c = ctx_add(a, b);
  EXPECT_EQ(c.entries.size(), 2u);
  EXPECT_EQ(render(c), "{p: +{q:m().end}, q: end}");
}

TEST(CtxAdd, OverlapComposesInParallel) {
  DeltaCtx a{{Role{"p"}, out("q", "b")}};
  DeltaCtx b{{Role{"p"}, out("q", "a")}};
  EXPECT_EQ(ctx_add(a, b), ctx_add(b, a));
  auto c = ctx_add(a, b);
  ASSERT_TRUE(std::holds_alternative<ParType>(c.entries.at(Role{"p"}).node));
  EXPECT_EQ(std::get<ParType>(c.entries.at(Role{"p"}).node).components.size(), 2u);
}

TEST(CtxAdd, Associative) {
  DeltaCtx a{{Role{"p"}, out("q", "c")}};
  DeltaCtx b{{Role{"p"}, out("q", "a")}, {Role{"r"}, end_t()}};
  DeltaCtx c{{Role{"p"}, end_t()}};
  EXPECT_EQ(ctx_add(ctx_add(a, b), c), ctx_add(a, ctx_add(b, c)));
}

TEST(CtxSplits, PlainEntriesGoWholly) {
  DeltaCtx d{{Role{"p"}, out("q", "m")}, {Role{"q"}, end_t()}};
  EXPECT_EQ(count_splits(d), 4u);
  for (const auto& [l, r] : ctx_splits(d)) EXPECT_EQ(ctx_add(l, r), d);
}

TEST(CtxSplits, ParallelEntriesDivideComponents) {
  DeltaCtx d;
  d.entries.emplace(Role{"p"}, normalize(SessionType{ParType{{out("q", "a"), out("q", "b"), out("q", "a")}}}));
  // a^2 b: 3 choices for a, 2 for b
  EXPECT_EQ(count_splits(d), 6u);
  for (const auto& [l, r] : ctx_splits(d)) EXPECT_EQ(ctx_add(l, r), d);
}

TEST(CtxSplits, EmptyContextHasOneSplit) { EXPECT_EQ(count_splits(DeltaCtx{}), 1u); }

TEST(EndPred, ParallelOfEnds) {
  EXPECT_TRUE(end_pred(SessionType{ParType{{end_t(), end_t()}}}));
  EXPECT_FALSE(end_pred(SessionType{ParType{{end_t(), out("q", "m")}}}));
  EXPECT_TRUE(end_pred(DeltaCtx{}));
}

TEST(Theta, IsAMultiset) {
  MessageType m{Role{"p"}, Role{"q"}, Label{"m"}, {BaseType::Int}};
  ThetaCtx t{m, m};
  EXPECT_EQ(t.size(), 2u);
  EXPECT_TRUE(t.remove_one(m));
  EXPECT_TRUE(t.remove_one(m));
  EXPECT_FALSE(t.remove_one(m));
}

TEST(RemoveComponent, LastComponentUnwraps) {
  DeltaCtx d;
  d.entries.emplace(Role{"p"}, normalize(SessionType{ParType{{out("q", "a"), out("q", "b")}}}));
  auto e = remove_component(d, Role{"p"}, out("q", "a"));
  EXPECT_EQ(e.entries.at(Role{"p"}), out("q", "b"));
  auto f = remove_component(e, Role{"p"}, out("q", "b"));
  EXPECT_FALSE(f.entries.contains(Role{"p"}));
}
