#include <gtest/gtest.h>

#include "corpus.hpp"
#include "magpi/magpi.hpp"

using namespace magpi;

namespace {

struct Loaded {
  Program prog;
  ContextTriple ctx;
  CtxState s0;
};

Loaded load(const std::string& f) {
  Loaded l{corpus::load(f), {}, {}};
  l.ctx = initial_contexts(l.prog);
  l.s0 = initial_state(l.ctx);
  return l;
}

}  // namespace

TEST(Safety, NfViolatesPhiC) {
  auto l = load("nf.magpi");
  auto v = check_safety(l.ctx.gamma, l.s0, l.prog.reliability);
  EXPECT_EQ(v.status, Status::Violated);
  ASSERT_TRUE(v.condition);
  EXPECT_EQ(*v.condition, Condition::PhiC);
  EXPECT_EQ(render_witness(v.witness), "[p⊕q:m]");
  ASSERT_EQ(v.witness.size(), 1u);
  EXPECT_EQ(v.witness[0].action, Action::output(Role{"p"}, Role{"q"}, Label{"m"}));
}

TEST(Safety, PayloadSwitchHidesPhiC) {
  auto l = load("nf.magpi");
  auto v = check_safety(l.ctx.gamma, l.s0, l.prog.reliability, {}, SafetyOptions{false});
  EXPECT_EQ(v.status, Status::Holds);
}

TEST(Safety, CorpusPositive) {
  for (const char* f : {"ping.magpi", "load_balancer.magpi", "ping_linear_server.magpi",
                        "ping_linear_server_retry.magpi", "ping_replicated_server.magpi", "minimal.magpi"}) {
    auto l = load(f);
    auto v = check_safety(l.ctx.gamma, l.s0, l.prog.reliability);
    EXPECT_EQ(v.status, Status::Holds) << f << ": " << v.detail;
  }
}

TEST(Safety, PhiR1MissingTimeoutOnUnreliablePeer) {
  DeltaCtx d{{Role{"q"}, branch_t({tarm("p", "m", {}, end_t())})}, {Role{"p"}, select_t({tarm("q", "m", {}, end_t())})}};
  auto vs = check_state_conditions({}, CtxState{d, {}}, {});
  ASSERT_FALSE(vs.empty());
  EXPECT_EQ(vs[0].condition, Condition::PhiR1);
  EXPECT_TRUE(check_state_conditions({}, CtxState{d, {}}, ReliabilityRelation{{"p", "q"}}).empty());
}

TEST(Safety, PhiR2TimeoutNeedsSomeUnreliablePeer) {
  DeltaCtx d{{Role{"q"}, branch_t({tarm("p", "m", {}, end_t())}, end_t())}};
  auto vs = check_state_conditions({}, CtxState{d, {}}, ReliabilityRelation{{"p", "q"}});
  ASSERT_FALSE(vs.empty());
  EXPECT_EQ(vs[0].condition, Condition::PhiR2);
}

TEST(Safety, PhiBangC) {
  GammaCtx g;
  g.replicated.emplace(Role{"s"}, replicated_t({tarm("c", "req", {BaseType::Int}, end_t())}));
  ThetaCtx t{MessageType{Role{"c"}, Role{"s"}, Label{"req"}, {BaseType::String}}};
  auto vs = check_state_conditions(g, CtxState{{}, t}, {});
  ASSERT_FALSE(vs.empty());
  EXPECT_EQ(vs[0].condition, Condition::PhiBangC);
}

TEST(Safety, WitnessIsShortest) {
  // the bad message is produced only after an unrelated exchange
  DeltaCtx d{{Role{"p"}, select_t({tarm("r", "go", {}, select_t({tarm("q", "m", {BaseType::Int}, end_t())}))})},
             {Role{"r"}, branch_t({tarm("p", "go", {}, end_t())}, end_t())},
             {Role{"q"}, branch_t({tarm("p", "m", {BaseType::String}, end_t())}, end_t())}};
  auto v = check_safety({}, CtxState{d, {}}, {});
  EXPECT_EQ(v.status, Status::Violated);
  EXPECT_EQ(render_witness(v.witness), "[p⊕r:go, p⊕q:m]");
}

TEST(Df, CorpusVerdicts) {
  for (const char* f : {"ping.magpi", "load_balancer.magpi", "nf.magpi", "minimal.magpi"}) {
    auto l = load(f);
    EXPECT_EQ(check_df_types(l.ctx.gamma, l.s0).status, Status::Holds) << f;
  }
}

TEST(Df, StuckBranchViolates) {
  DeltaCtx d{{Role{"q"}, branch_t({tarm("p", "m", {}, end_t())})}};
  auto v = check_df_types({}, CtxState{d, {}});
  EXPECT_EQ(v.status, Status::Violated);
  EXPECT_EQ(v.condition, Condition::Df);
}

TEST(Term, PingBounded) {
  auto l = load("ping.magpi");
  auto v = check_term_types(l.ctx.gamma, l.s0);
  EXPECT_EQ(v.status, Status::Holds);
  ASSERT_TRUE(v.longest_path);
  EXPECT_GT(*v.longest_path, 0u);
}

TEST(Tt, Corpus) {
  EXPECT_TRUE(check_tt(load("ping.magpi").ctx.gamma));
  EXPECT_FALSE(check_tt(load("load_balancer.magpi").ctx.gamma));
  EXPECT_TRUE(check_tt(load("minimal.magpi").ctx.gamma));
}

TEST(Transfer, OnlyFromHoldingVerdicts) {
  auto l = load("ping.magpi");
  auto r = verify(l.prog);
  EXPECT_TRUE(r.typing.ok());
  EXPECT_TRUE(r.transfer.df_network);
  EXPECT_TRUE(r.transfer.term_network);
  auto nf = verify(load("nf.magpi").prog);
  EXPECT_FALSE(nf.transfer.df_network);
  EXPECT_TRUE(nf.transfer.claims.empty());
}

TEST(Transfer, NetworkLevelAgreesOnPing) {
  auto l = load("ping.magpi");
  auto ex = explore_network(l.prog.network, l.prog.reliability);
  EXPECT_EQ(check_df_network(ex).status, check_df_types(l.ctx.gamma, l.s0).status);
  EXPECT_EQ(check_term_network(ex).status, check_term_types(l.ctx.gamma, l.s0).status);
}
