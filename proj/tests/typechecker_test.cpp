#include <gtest/gtest.h>

#include "corpus.hpp"
#include "derivation_validator.hpp"
#include "magpi/magpi.hpp"

using namespace magpi;

namespace {

TypecheckResult check_text(const std::string& text) {
  auto r = parse_source(text);
  EXPECT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : r.diagnostics.front().message);
  return typecheck(*r.program);
}

bool uses_rule(const Derivation& d, TypingRule rule) {
  if (d.rule == rule) return true;
  for (const auto& p : d.premises)
    if (uses_rule(p, rule)) return true;
  return false;
}

}  // namespace

TEST(Typecheck, CorpusDerivationsValidate) {
  for (const auto& e : corpus::entries()) {
    auto p = corpus::load(e["file"]);
    auto r = typecheck(p);
    ASSERT_TRUE(r.ok()) << e["file"] << ": " << r.error->message;
    auto ctx = initial_contexts(p);
    auto problem = validate::check(*r.derivation, ctx.gamma);
    EXPECT_FALSE(problem) << e["file"] << ": " << *problem;
    EXPECT_EQ(r.derivation->rule, TypingRule::TPar1);
  }
}

TEST(Typecheck, ServerUsesTBang) {
  auto r = typecheck(corpus::load("ping.magpi"));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(uses_rule(*r.derivation, TypingRule::TBang));
  EXPECT_TRUE(uses_rule(*r.derivation, TypingRule::TSend));
  EXPECT_TRUE(uses_rule(*r.derivation, TypingRule::TRecv));
}

TEST(Typecheck, LoadBalancerUsesCallAndChoice) {
  auto r = typecheck(corpus::load("load_balancer.magpi"));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(uses_rule(*r.derivation, TypingRule::TCall));
  EXPECT_TRUE(uses_rule(*r.derivation, TypingRule::TChoice));
}

TEST(Typecheck, BufferTypedByTBufChain) {
  auto r = typecheck(corpus::load("nf.magpi"));
  ASSERT_TRUE(r.ok());
  const auto& buf = r.derivation->premises[1];
  EXPECT_EQ(buf.rule, TypingRule::TBuf);
  EXPECT_EQ(buf.premises.back().rule, TypingRule::TEmpty);
}

TEST(Typecheck, WrongPayloadTypeFails) {
  auto r = check_text("role p : +{q:m(Int).end} = send q:m<\"no\">.end\nrole q : &{p:m(Int).end} = recv{p:m(x).end}");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.failing_role, Role{"p"});
  EXPECT_EQ(r.error->rule, "T-Val");
  EXPECT_EQ(r.error->location.line, 1);
}

TEST(Typecheck, UnofferedLabelFails) {
  auto r = check_text("role p : +{q:m().end} = send q:other<>.end\nrole q : end = end");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error->rule, "T-Send");
}

TEST(Typecheck, ReceiveArmSetMustMatch) {
  auto r = check_text("role q : &{p:a().end, p:b().end} = recv{p:a().end}\nrole p : end = end");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error->rule, "T-Recv");
}

TEST(Typecheck, TimeoutPresenceMustMatch) {
  EXPECT_FALSE(check_text("role q : &{p:a().end} = recv{p:a().end, timeout.end}\nrole p : end = end").ok());
  EXPECT_FALSE(check_text("role q : &{p:a().end, timeout.end} = recv{p:a().end}\nrole p : end = end").ok());
}

TEST(Typecheck, UnfinishedTypeWithFinishedProcessFails) {
  auto r = check_text("role p : +{q:m().end} = end\nrole q : end = end");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error->rule, "T-0");
}

TEST(Typecheck, ServerWithoutReplicatedTypeFails) {
  auto r = check_text("role s = server{c:ping().end}\nrole c : end = end");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error->rule, "T-Bang");
}

TEST(Typecheck, ReportsRealFailureAfterTypedRoles) {
  // role a types fine; the error in role z must not be masked
  auto r = check_text("role a : +{z:m().end} = send z:m<>.end\nrole z : &{a:m(Int).end} = recv{a:m().end}");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.failing_role, Role{"z"});
}

TEST(Typecheck, BufferMessageNeedsThetaEntry) {
  auto p = corpus::load("nf.magpi");
  auto ctx = initial_contexts(p);
  ctx.theta = {};
  auto r = typecheck(p.network, ctx);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error->rule, "T-Buf");
}

TEST(Typecheck, ThetaWeakeningAccepted) {
  auto p = corpus::load("ping.magpi");
  auto ctx = initial_contexts(p);
  ctx.theta.add(MessageType{Role{"c"}, Role{"s"}, Label{"ping"}, {}});
  EXPECT_TRUE(typecheck(p.network, ctx).ok());
}

TEST(Typecheck, DeltaWeakeningRejected) {
  auto p = corpus::load("ping.magpi");
  auto ctx = initial_contexts(p);
  ctx.delta.entries.emplace(Role{"extra"}, select_t({tarm("c", "m", {}, end_t())}));
  EXPECT_FALSE(typecheck(p.network, ctx).ok());
  // an end-typed extra role is harmless
  auto ctx2 = initial_contexts(p);
  ctx2.delta.entries.emplace(Role{"extra"}, end_t());
  EXPECT_TRUE(typecheck(p.network, ctx2).ok());
}

TEST(Typecheck, ParallelThreadsMatchComponents) {
  Network n;
  n.processes.emplace(Role{"p"}, par(lin(send("q", "a", {}, inact())), lin(send("q", "b", {}, inact()))));
  ContextTriple ctx;
  ctx.delta.entries.emplace(
      Role{"p"}, normalize(SessionType{ParType{{select_t({tarm("q", "b", {}, end_t())}),
                                                select_t({tarm("q", "a", {}, end_t())}), end_t()}}}));
  auto r = typecheck(n, ctx);
  ASSERT_TRUE(r.ok()) << r.error->message;
  EXPECT_FALSE(validate::check(*r.derivation, ctx.gamma));
  EXPECT_TRUE(uses_rule(*r.derivation, TypingRule::TParProc));
}

TEST(Typecheck, TypeValue) {
  EXPECT_TRUE(typecheck_value(Literal{std::int64_t{1}}, BaseType::Int));
  EXPECT_FALSE(typecheck_value(Literal{std::string("x")}, BaseType::Int));
  EXPECT_TRUE(typecheck_value(call("f", {var("d")}), BaseType::Real, {{"d", BaseType::Int}}));
  EXPECT_FALSE(typecheck_value(call("f", {var("d")}), BaseType::Int, {{"d", BaseType::Int}}));
}

TEST(Validator, RejectsTamperedDerivation) {
  auto p = corpus::load("nf.magpi");
  auto r = typecheck(p);
  ASSERT_TRUE(r.ok());
  auto d = *r.derivation;
  d.theta = {};  // the buffer can no longer be justified
  EXPECT_TRUE(validate::check(d, initial_contexts(p).gamma));
}
