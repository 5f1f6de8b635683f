#include <gtest/gtest.h>

#include "corpus.hpp"
#include "magpi/magpi.hpp"

using namespace magpi;

// Smaller runs than the acceptance suite; enough to catch regressions.

TEST(SubjectReduction, SafeCorpusHasNoCounterexample) {
  for (const auto& f : corpus::safe_entries()) {
    auto p = corpus::load(f);
    SubjectReductionOptions o;
    o.traces = 60;
    o.seed = 42;
    auto rep = harness_subject_reduction(p.network, initial_contexts(p), p.reliability, o);
    ASSERT_TRUE(rep.precondition_ok) << f << ": " << rep.precondition_failure;
    EXPECT_TRUE(rep.counterexamples.empty()) << f << ": " << rep.counterexamples.front().reason << " after "
                                             << render(rep.counterexamples.front().step);
    if (!enumerate_steps(p.network, p.reliability).empty()) EXPECT_GT(rep.steps_checked, 0u) << f;
  }
}

TEST(SubjectReduction, UnsafeInputFailsPrecondition) {
  auto p = corpus::load("nf.magpi");
  auto rep = harness_subject_reduction(p.network, initial_contexts(p), p.reliability);
  EXPECT_FALSE(rep.precondition_ok);
  EXPECT_EQ(rep.traces_run, 0u);
}

TEST(SubjectReduction, MutantCaughtWithoutPayloadCheck) {
  auto p = corpus::load("nf_mutant.magpi");
  SubjectReductionOptions o;
  o.traces = 200;
  o.safety.check_payload_types = false;
  auto rep = harness_subject_reduction(p.network, initial_contexts(p), p.reliability, o);
  ASSERT_TRUE(rep.precondition_ok) << rep.precondition_failure;
  EXPECT_FALSE(rep.counterexamples.empty());
}

TEST(SubjectReduction, PluggableTypecheck) {
  auto p = corpus::load("ping.magpi");
  SubjectReductionOptions o;
  o.traces = 1;
  int calls = 0;
  o.typecheck = [&](const Network& n, const GammaCtx& g, const CtxState& s) {
    ++calls;
    return default_typecheck()(n, g, s);
  };
  harness_subject_reduction(p.network, initial_contexts(p), p.reliability, o);
  EXPECT_GT(calls, 0);
}

TEST(SessionFidelity, PingAndLoadBalancer) {
  for (const char* f : {"ping.magpi", "load_balancer.magpi"}) {
    auto p = corpus::load(f);
    auto rep = harness_session_fidelity(p.network, initial_contexts(p), p.reliability);
    EXPECT_EQ(rep.status, Status::Holds) << f << ": " << rep.detail;
    EXPECT_TRUE(rep.unmatched.empty()) << f << ": " << (rep.unmatched.empty() ? "" : rep.unmatched.front());
    EXPECT_GT(rep.states_with_transitions, 0u) << f;
    EXPECT_EQ(rep.matched, rep.states_with_transitions) << f;
  }
}
