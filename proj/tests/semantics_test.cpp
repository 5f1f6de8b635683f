#include <gtest/gtest.h>

#include <algorithm>

#include "corpus.hpp"
#include "magpi/magpi.hpp"

using namespace magpi;

namespace {

std::vector<std::string> rules_of(const std::vector<NetSuccessor>& ss) {
  std::vector<std::string> out;
  for (const auto& s : ss) out.push_back(to_string(s.step.rule));
  std::sort(out.begin(), out.end());
  return out;
}

Network single(const std::string& role, ProcessTerm t) {
  Network n;
  n.processes.emplace(Role{role}, std::move(t));
  return n;
}

}  // namespace

TEST(Steps, NfHasFourImmediateSuccessors) {
  auto p = corpus::load("nf.magpi");
  auto steps = enumerate_steps(p.network, p.reliability);
  EXPECT_EQ(rules_of(steps), (std::vector<std::string>{"FDrop", "FTimeout", "PRecv", "PSend"}));
}

TEST(Steps, ReliablePairCannotDrop) {
  auto p = corpus::load("nf.magpi");
  auto r = ReliabilityRelation{{"p", "q"}};
  auto steps = enumerate_steps(p.network, r);
  EXPECT_EQ(rules_of(steps), (std::vector<std::string>{"FTimeout", "PRecv", "PSend"}));
}

TEST(Steps, SendEvaluatesPayload) {
  Network n = single("p", lin(send("q", "m", {call("f", {lit(std::int64_t{3})})}, inact())));
  auto steps = enumerate_steps(n, {});
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].step.rule, StepRule::PSend);
  EXPECT_EQ(render(steps[0].next.buffer), "{p->q:m<3.0>}");
}

TEST(Steps, ReceiveSubstitutesBinders) {
  Network n = single("q", lin(recv({arm("p", "m", {"x"}, send("r", "fwd", {var("x")}, inact()))})));
  n.buffer.add(Message{Role{"p"}, Role{"q"}, Label{"m"}, {std::int64_t{7}}});
  auto steps = enumerate_steps(n, ReliabilityRelation{{"p", "q"}});
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].step.rule, StepRule::PRecv);
  EXPECT_EQ(render(steps[0].next.processes.at(Role{"q"})), "send r:fwd<7>.end");
  EXPECT_TRUE(steps[0].next.buffer.empty());
}

TEST(Steps, ArityMismatchIsARuntimeTypeError) {
  Network n = single("q", lin(recv({arm("p", "m", {"x", "y"}, inact())})));
  n.buffer.add(Message{Role{"p"}, Role{"q"}, Label{"m"}, {std::int64_t{7}}});
  auto steps = enumerate_steps(n, ReliabilityRelation{{"p", "q"}});
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].step.rule, StepRule::RuntimeTypeError);
  EXPECT_EQ(steps[0].next, n);
}

TEST(Steps, UnevaluablePayloadIsARuntimeTypeError) {
  Network n = single("p", lin(send("q", "m", {var("ghost")}, inact())));
  auto steps = enumerate_steps(n, {});
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].step.rule, StepRule::RuntimeTypeError);
}

TEST(Steps, ServerSpawnsAndPersists) {
  Network n = single("s", server({arm("c", "ping", {}, send("c", "pong", {}, inact()))}));
  n.buffer.add(Message{Role{"c"}, Role{"s"}, Label{"ping"}, {}});
  n.buffer.add(Message{Role{"c"}, Role{"s"}, Label{"ping"}, {}});
  auto steps = enumerate_steps(n, ReliabilityRelation{{"c", "s"}});
  ASSERT_EQ(steps.size(), 1u);  // both copies give the same successor
  EXPECT_EQ(steps[0].step.rule, StepRule::PBangRecv);
  auto threads = flatten(steps[0].next.processes.at(Role{"s"}));
  EXPECT_EQ(threads.size(), 2u);
  EXPECT_EQ(steps[0].next.buffer.size(), 1u);
}

TEST(Steps, TimeoutAlwaysAvailable) {
  Network n = single("q", lin(recv({arm("p", "m", {}, inact())}, inact())));
  n.buffer.add(Message{Role{"p"}, Role{"q"}, Label{"m"}, {}});
  auto steps = enumerate_steps(n, ReliabilityRelation{{"p", "q"}});
  EXPECT_EQ(rules_of(steps), (std::vector<std::string>{"FTimeout", "PRecv"}));
}

TEST(Steps, ChoiceResolvesInternally) {
  Network n = single("p", lin(choice({send("q", "a", {}, inact()), send("q", "b", {}, inact())})));
  auto steps = enumerate_steps(n, {});
  EXPECT_EQ(rules_of(steps), (std::vector<std::string>{"ChoiceStep", "ChoiceStep"}));
}

TEST(StateId, RenderDigest) {
  auto p = corpus::load("nf.magpi");
  EXPECT_EQ(state_id(p.network), state_id(normalize(p.network)));
  EXPECT_EQ(state_id(p.network).digest, fnv1a64(render(p.network)));
}

TEST(Simulate, SeedIsReproducible) {
  auto p = corpus::load("ping.magpi");
  auto a = simulate(p.network, p.reliability, 11, 50);
  auto b = simulate(p.network, p.reliability, 11, 50);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(render(a.steps[i].step), render(b.steps[i].step));
  EXPECT_EQ(a.final_network, b.final_network);
}

TEST(Simulate, NeverDropDeliversPing) {
  auto p = corpus::load("ping.magpi");
  auto t = simulate(p.network, p.reliability, 7, 100, DropPolicy::NeverDrop);
  EXPECT_FALSE(t.failed);
  for (const auto& e : t.steps) EXPECT_NE(e.step.rule, StepRule::FDrop);
  ASSERT_FALSE(t.steps.empty());
  EXPECT_EQ(render(t.steps.back().step), "PRecv r c->r:ok<> #0");
}

TEST(Simulate, EagerDropDropsFirst) {
  auto p = corpus::load("nf.magpi");
  auto t = simulate(p.network, p.reliability, 3, 10, DropPolicy::EagerDrop);
  ASSERT_FALSE(t.steps.empty());
  EXPECT_EQ(t.steps.front().step.rule, StepRule::FDrop);
}

TEST(Simulate, NoSpuriousTimeoutWhileMessageWaits) {
  auto p = corpus::load("nf.magpi");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = simulate(p.network, p.reliability, seed, 10, DropPolicy::NeverSpuriousTimeout);
    ASSERT_FALSE(t.steps.empty());
    EXPECT_NE(t.steps.front().step.rule, StepRule::FTimeout);
  }
}

TEST(Simulate, TraceIdsChain) {
  auto p = corpus::load("load_balancer.magpi");
  auto t = simulate(p.network, p.reliability, 5, 40);
  for (std::size_t i = 1; i < t.steps.size(); ++i) EXPECT_EQ(t.steps[i].pre, t.steps[i - 1].post);
  if (!t.steps.empty()) EXPECT_EQ(t.steps.back().post, state_id(t.final_network));
}

TEST(Explore, CorpusNetworks) {
  for (const char* f : {"ping.magpi", "load_balancer.magpi", "nf.magpi", "minimal.magpi"}) {
    auto p = corpus::load(f);
    auto ex = explore_network(p.network, p.reliability);
    EXPECT_TRUE(ex.exhausted) << f;
    EXPECT_TRUE(ex.errors.empty()) << f;
    EXPECT_EQ(check_df_network(ex).status, Status::Holds) << f;
    EXPECT_EQ(check_term_network(ex).status, Status::Holds) << f;
  }
}

TEST(Explore, StuckNetworkViolatesDf) {
  Network n = single("q", lin(recv({arm("p", "m", {}, inact())})));
  n.processes.emplace(Role{"p"}, lin(inact()));
  auto ex = explore_network(n, ReliabilityRelation{{"p", "q"}});
  EXPECT_EQ(check_df_network(ex).status, Status::Violated);
}

TEST(Explore, BudgetGivesInconclusive) {
  auto p = corpus::load("ping.magpi");
  auto ex = explore_network(p.network, p.reliability, StateBudget{5});
  EXPECT_FALSE(ex.exhausted);
  EXPECT_EQ(check_df_network(ex).status, Status::Inconclusive);
}

TEST(Explore, CycleViolatesTerm) {
  // a server that feeds itself forever
  Network n = single("s", server({arm("s2", "tick", {}, send("s2", "tick", {}, inact()))}));
  n.processes.emplace(Role{"s2"}, server({arm("s", "tick", {}, send("s", "tick", {}, inact()))}));
  n.buffer.add(Message{Role{"s2"}, Role{"s"}, Label{"tick"}, {}});
  auto ex = explore_network(n, ReliabilityRelation{{"s", "s2"}}, StateBudget{200});
  // finished spawned threads vanish, so the network returns to its start
  EXPECT_TRUE(ex.exhausted);
  EXPECT_EQ(check_df_network(ex).status, Status::Holds);
  EXPECT_EQ(check_term_network(ex).status, Status::Violated);
}

TEST(FailureHandling, UnreliableWaitWithoutTimeout) {
  Network n = single("q", lin(recv({arm("p", "m", {}, inact())})));
  n.processes.emplace(Role{"p"}, lin(send("q", "m", {}, inact())));
  auto unreliable = explore_network(n, {});
  EXPECT_EQ(check_failure_handling(unreliable, {}).status, Status::Violated);
  auto reliable = explore_network(n, ReliabilityRelation{{"p", "q"}});
  EXPECT_EQ(check_failure_handling(reliable, ReliabilityRelation{{"p", "q"}}).status, Status::Holds);
}
