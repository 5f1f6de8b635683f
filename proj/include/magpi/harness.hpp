#pragma once

// Executable checks of the meta-theory on concrete inputs: random traces
// whose every step must be matched by a short context reduction that
// retypes the network (subject reduction), and context transitions that the
// typed network must be able to follow (session fidelity).

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "magpi/context_lts.hpp"
#include "magpi/semantics.hpp"
#include "magpi/typechecker.hpp"
#include "magpi/verifier.hpp"

namespace magpi {

using TypecheckFn = std::function<bool(const Network&, const GammaCtx&, const CtxState&)>;

inline TypecheckFn default_typecheck() {
  return [](const Network& n, const GammaCtx& g, const CtxState& s) {
    return typecheck(n, ContextTriple{g, s.delta, s.theta}).ok();
  };
}

namespace detail {

// Context states reachable in at most `max_steps` transitions (including
// zero) that type `n` and pass the state conditions.
inline std::vector<CtxState> retyping_contexts(const GammaCtx& g, const CtxState& from, const Network& n,
                                               const ReliabilityRelation& r, std::size_t max_steps,
                                               const SafetyOptions& so, const TypecheckFn& tc) {
  std::vector<CtxState> out;
  std::unordered_set<std::string> seen{render(from)};
  std::vector<CtxState> layer{from};
  for (std::size_t k = 0;; ++k) {
    for (const auto& s : layer)
      if (check_state_conditions(g, s, r, so).empty() && tc(n, g, s)) out.push_back(s);
    if (!out.empty() || k == max_steps) break;
    std::vector<CtxState> next;
    for (const auto& s : layer)
      for (auto& t : ctx_transitions(g, s))
        if (seen.insert(render(t.next)).second) next.push_back(std::move(t.next));
    layer = std::move(next);
  }
  return out;
}

}  // namespace detail

struct SubjectReductionOptions {
  std::size_t traces = 1000;
  std::size_t depth = 20;
  std::uint64_t seed = 0;
  std::size_t max_ctx_steps = 2;
  std::size_t max_candidates = 8;  // context states tracked per trace position
  SafetyOptions safety{};
  TypecheckFn typecheck = default_typecheck();
};

struct SubjectReductionCounterexample {
  std::size_t trace_index = 0;
  std::vector<NetStep> prefix;  // steps before the failing one
  NetStep step;
  Network before;
  Network after;
  std::vector<CtxState> contexts;  // context candidates before the step
  std::string reason;
};

struct SubjectReductionReport {
  bool precondition_ok = false;
  std::string precondition_failure;
  std::size_t traces_run = 0;
  std::size_t steps_checked = 0;
  std::vector<SubjectReductionCounterexample> counterexamples;
};

// Random traces from a typed, safe starting point. Each network step must be
// matched by at most `max_ctx_steps` context transitions. Several matching
// context states may be carried forward; a trace fails only when none
// survives.
inline SubjectReductionReport harness_subject_reduction(const Network& n, const ContextTriple& ctx,
                                                        const ReliabilityRelation& r,
                                                        const SubjectReductionOptions& opts = {}) {
  SubjectReductionReport rep;
  CtxState s0 = initial_state(ctx);
  Network n0 = normalize(n);
  if (!opts.typecheck(n0, ctx.gamma, s0)) {
    rep.precondition_failure = "network does not typecheck";
    return rep;
  }
  auto safety = check_safety(ctx.gamma, s0, r, {}, opts.safety);
  if (safety.status != Status::Holds) {
    rep.precondition_failure = std::string("contexts are not safe: ") + to_string(safety.status);
    return rep;
  }
  rep.precondition_ok = true;

  std::mt19937_64 rng(opts.seed);
  for (std::size_t t = 0; t < opts.traces; ++t) {
    ++rep.traces_run;
    Network cur = n0;
    std::vector<CtxState> cands{s0};
    std::vector<NetStep> prefix;
    for (std::size_t d = 0; d < opts.depth; ++d) {
      auto steps = enumerate_steps(cur, r);
      if (steps.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, steps.size() - 1);
      auto chosen = std::move(steps[pick(rng)]);
      ++rep.steps_checked;
      auto report = [&](std::string why) {
        rep.counterexamples.push_back({t, prefix, chosen.step, cur, chosen.next, cands, std::move(why)});
      };
      if (chosen.step.rule == StepRule::RuntimeTypeError) {
        report("runtime type error: " + chosen.step.error);
        break;
      }
      std::vector<CtxState> next;
      std::unordered_set<std::string> seen;
      for (const auto& c : cands) {
        for (auto& s : detail::retyping_contexts(ctx.gamma, c, chosen.next, r, opts.max_ctx_steps, opts.safety,
                                                 opts.typecheck))
          if (next.size() < opts.max_candidates && seen.insert(render(s)).second) next.push_back(std::move(s));
      }
      if (next.empty()) {
        report("no context reduction of length <= " + std::to_string(opts.max_ctx_steps) +
               " retypes the reduced network");
        break;
      }
      prefix.push_back(chosen.step);
      cur = std::move(chosen.next);
      cands = std::move(next);
    }
  }
  return rep;
}

struct SessionFidelityOptions {
  ClosureOptions closure{};
  std::size_t max_net_steps = 4;
  std::size_t max_ctx_steps = 2;
  std::size_t max_pairs = 200'000;
  SafetyOptions safety{};
  TypecheckFn typecheck = default_typecheck();
};

struct SessionFidelityReport {
  Status status = Status::Inconclusive;
  std::string detail;
  std::size_t closure_states = 0;
  std::size_t paired_states = 0;            // closure states typing some reachable network
  std::size_t states_with_transitions = 0;  // among the paired ones
  std::size_t matched = 0;
  std::vector<std::string> unmatched;       // rendered context states
};

// Pairs reachable networks with the context states typing them (following
// the subject-reduction matching), then checks that every paired state with
// a transition has a network that reaches, within `max_net_steps`, a network
// typed by one of that state's successors.
inline SessionFidelityReport harness_session_fidelity(const Network& n, const ContextTriple& ctx,
                                                      const ReliabilityRelation& r,
                                                      const SessionFidelityOptions& opts = {}) {
  SessionFidelityReport rep;
  const GammaCtx& g = ctx.gamma;
  CtxState s0 = initial_state(ctx);
  auto closure = ctx_reduce_closure(g, s0, opts.closure);
  rep.closure_states = closure.states.size();
  if (!closure.exhausted) {
    rep.detail = "context closure not exhausted";
    return rep;
  }
  std::unordered_map<std::string, std::size_t> state_index;
  for (std::size_t i = 0; i < closure.states.size(); ++i) state_index.emplace(render(closure.states[i]), i);

  Network n0 = normalize(n);
  if (!opts.typecheck(n0, g, s0)) {
    rep.status = Status::Violated;
    rep.detail = "initial network does not typecheck";
    return rep;
  }

  // Pairing.
  std::vector<std::vector<Network>> paired(closure.states.size());
  std::unordered_set<std::string> seen_pairs;
  std::deque<std::pair<Network, std::size_t>> work;
  auto add_pair = [&](const Network& net, std::size_t si) {
    if (seen_pairs.size() >= opts.max_pairs) return false;
    if (!seen_pairs.insert(render(net) + "|" + std::to_string(si)).second) return true;
    paired[si].push_back(net);
    work.emplace_back(net, si);
    return true;
  };
  add_pair(n0, 0);
  bool truncated = false;
  while (!work.empty()) {
    auto [net, si] = std::move(work.front());
    work.pop_front();
    for (auto& succ : enumerate_steps(net, r)) {
      if (succ.step.rule == StepRule::RuntimeTypeError) continue;
      for (auto& s : detail::retyping_contexts(g, closure.states[si], succ.next, r, opts.max_ctx_steps, opts.safety,
                                               opts.typecheck)) {
        auto it = state_index.find(render(s));
        if (it == state_index.end()) continue;  // cannot happen on an exhausted closure
        if (!add_pair(succ.next, it->second)) truncated = true;
      }
    }
  }

  // Matching.
  for (std::size_t i = 0; i < closure.states.size(); ++i) {
    if (paired[i].empty()) continue;
    ++rep.paired_states;
    auto succ = ctx_transitions(g, closure.states[i]);
    if (succ.empty()) continue;
    ++rep.states_with_transitions;
    auto typed_by_successor = [&](const Network& net) {
      for (const auto& t : succ)
        if (check_state_conditions(g, t.next, r, opts.safety).empty() && opts.typecheck(net, g, t.next)) return true;
      return false;
    };
    bool ok = false;
    for (const auto& start : paired[i]) {
      std::unordered_set<std::string> seen{render(start)};
      std::vector<Network> layer{start};
      for (std::size_t k = 0; k <= opts.max_net_steps && !ok && !layer.empty(); ++k) {
        for (const auto& net : layer)
          if (typed_by_successor(net)) {
            ok = true;
            break;
          }
        if (ok || k == opts.max_net_steps) break;
        std::vector<Network> next;
        for (const auto& net : layer)
          for (auto& s : enumerate_steps(net, r))
            if (s.step.rule != StepRule::RuntimeTypeError && seen.insert(render(s.next)).second)
              next.push_back(std::move(s.next));
        layer = std::move(next);
      }
      if (ok) break;
    }
    if (ok) ++rep.matched;
    else rep.unmatched.push_back(render(closure.states[i]));
  }

  if (!rep.unmatched.empty()) {
    rep.status = Status::Violated;
    rep.detail = std::to_string(rep.unmatched.size()) + " context state(s) not matched by the network";
  } else if (truncated) {
    rep.detail = "pairing truncated at " + std::to_string(opts.max_pairs) + " pairs";
  } else {
    rep.status = Status::Holds;
  }
  return rep;
}

}  // namespace magpi
