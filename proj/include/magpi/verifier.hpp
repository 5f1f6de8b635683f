#pragma once

// Property checks over the context transition system: safety under a
// reliability relation, deadlock freedom, termination, the trivially
// terminating predicate, and what the type-level verdicts license for the
// network.

#include <optional>
#include <string>
#include <vector>

#include "magpi/context_lts.hpp"
#include "magpi/contexts.hpp"
#include "magpi/semantics.hpp"
#include "magpi/status.hpp"
#include "magpi/typechecker.hpp"

namespace magpi {

enum class Condition { PhiR1, PhiR2, PhiC, PhiBangC, Df, Term };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::PhiR1: return "phi-r1";
    case Condition::PhiR2: return "phi-r2";
    case Condition::PhiC: return "phi-c";
    case Condition::PhiBangC: return "phi-bang-c";
    case Condition::Df: return "df";
    case Condition::Term: return "term";
  }
  return "?";
}

struct Violation {
  Condition condition;
  Role role;
  std::string detail;
};

// Switches for mutation testing. Production code always checks everything.
struct SafetyOptions {
  bool check_payload_types = true;
};

// Conditions of a single state, each parallel component checked on its own.
inline std::vector<Violation> check_state_conditions(const GammaCtx& g, const CtxState& s, const ReliabilityRelation& r,
                                                     SafetyOptions opts = {}) {
  std::vector<Violation> out;
  auto payload_check = [&](const Role& p, const std::vector<TypeArm>& arms, Condition cond) {
    if (!opts.check_payload_types) return;
    for (const auto& m : s.theta.messages) {
      if (m.dst != p) continue;
      for (const auto& a : arms)
        if (a.peer == m.src && a.label == m.label && a.payload != m.payload)
          out.push_back({cond, p,
                         "message " + render(m) + " does not match expected payload " +
                             render_payload_types(a.payload)});
    }
  };
  for (const auto& [p, entry] : s.delta.entries) {
    for (const auto& c : detail::distinct_components(entry)) {
      auto* b = std::get_if<BranchType>(&c.node);
      if (!b) continue;
      if (!b->timeout) {
        for (const auto& a : b->arms)
          if (!r.reliable(p, a.peer))
            out.push_back({Condition::PhiR1, p, "receive from " + a.peer.value + " has no timeout but is unreliable"});
      } else {
        bool some_unreliable = false;
        for (const auto& a : b->arms) some_unreliable = some_unreliable || !r.reliable(p, a.peer);
        if (!some_unreliable)
          out.push_back({Condition::PhiR2, p, "receive with a timeout where every peer is reliable"});
      }
      payload_check(p, b->arms, Condition::PhiC);
    }
  }
  for (const auto& [p, rt] : g.replicated) payload_check(p, rt.arms, Condition::PhiBangC);
  return out;
}

struct WitnessStep {
  CtxState state;
  Action action;
};

struct Verdict {
  Status status = Status::Inconclusive;
  std::vector<WitnessStep> witness;  // meaningful when Violated
  std::optional<Condition> condition;
  std::string detail;
  std::size_t states_explored = 0;
  std::optional<std::size_t> longest_path;  // termination bound k
};

inline std::string render_witness(const std::vector<WitnessStep>& w) {
  std::string out = "[";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ", ";
    out += render(w[i].action);
  }
  return out + "]";
}

namespace detail {

inline std::vector<WitnessStep> witness_to(const CtxClosure& c, std::size_t target) {
  std::vector<WitnessStep> out;
  for (auto& [s, a] : c.path_to(target)) out.push_back({std::move(s), std::move(a)});
  return out;
}

inline std::string inconclusive_reason(const CtxClosure& c) {
  if (c.bang_bound_hit) return "server firing bound reached on some path";
  return "state budget exceeded";
}

}  // namespace detail

// Shortest violating path found breadth-first, or Holds on an exhausted
// closure where every state passes.
inline Verdict check_safety(const GammaCtx& g, const CtxState& s0, const ReliabilityRelation& r, ClosureOptions opts = {},
                            SafetyOptions so = {}) {
  std::optional<std::pair<std::size_t, Violation>> found;
  auto closure = ctx_reduce_closure(g, s0, opts, [&](const CtxClosure& c, std::size_t id) {
    auto vs = check_state_conditions(g, c.states[id], r, so);
    if (vs.empty()) return false;
    found.emplace(id, vs.front());
    return true;
  });
  Verdict v;
  v.states_explored = closure.states.size();
  if (found) {
    v.status = Status::Violated;
    v.condition = found->second.condition;
    v.detail = "role " + found->second.role.value + ": " + found->second.detail;
    v.witness = detail::witness_to(closure, found->first);
  } else if (closure.exhausted) {
    v.status = Status::Holds;
  } else {
    v.detail = detail::inconclusive_reason(closure);
  }
  return v;
}

// Every stuck state reachable from s0 is end-typed.
inline Verdict check_df_types(const GammaCtx& g, const CtxState& s0, ClosureOptions opts = {}) {
  auto closure = ctx_reduce_closure(g, s0, opts);
  Verdict v;
  v.states_explored = closure.states.size();
  for (std::size_t i = 0; i < closure.states.size(); ++i) {
    if (closure.terminal[i] && !end_pred(closure.states[i].delta)) {
      v.status = Status::Violated;
      v.condition = Condition::Df;
      v.detail = "stuck contexts that are not end-typed: " + render(closure.states[i]);
      v.witness = detail::witness_to(closure, i);
      return v;
    }
  }
  if (closure.exhausted) v.status = Status::Holds;
  else v.detail = detail::inconclusive_reason(closure);
  return v;
}

namespace detail {

// A back edge (u, edge index) of the closure graph, if any.
inline std::optional<std::size_t> find_back_edge(const CtxClosure& c) {
  std::size_t n = c.states.size();
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t e = 0; e < c.edges.size(); ++e) out[c.edges[e].from].push_back(e);
  std::vector<int> colour(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root]) continue;
    stack.push_back({root, 0});
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k == out[v].size()) {
        colour[v] = 2;
        stack.pop_back();
        continue;
      }
      std::size_t e = out[v][k++];
      std::size_t w = c.edges[e].to;
      if (colour[w] == 1) return e;
      if (colour[w] == 0) {
        colour[w] = 1;
        stack.push_back({w, 0});
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Deadlock freedom plus a finite bound on every path: on an exhausted
// closure that is exactly acyclicity.
inline Verdict check_term_types(const GammaCtx& g, const CtxState& s0, ClosureOptions opts = {}) {
  Verdict df = check_df_types(g, s0, opts);
  if (df.status != Status::Holds) {
    if (df.status == Status::Violated) df.condition = Condition::Df;
    return df;
  }
  auto closure = ctx_reduce_closure(g, s0, opts);
  Verdict v;
  v.states_explored = closure.states.size();
  if (auto e = detail::find_back_edge(closure)) {
    const auto& edge = closure.edges[*e];
    v.status = Status::Violated;
    v.condition = Condition::Term;
    v.detail = "reduction cycle through " + render(closure.states[edge.to]);
    v.witness = detail::witness_to(closure, edge.from);
    v.witness.push_back({closure.states[edge.from], edge.action});
    return v;
  }
  std::vector<std::pair<std::size_t, std::size_t>> plain;
  for (const auto& e : closure.edges) plain.emplace_back(e.from, e.to);
  v.longest_path = detail::longest_path_if_acyclic(closure.states.size(), plain);
  v.status = Status::Holds;
  return v;
}

// No server type is triggered by another server.
inline bool check_tt(const GammaCtx& g) {
  for (const auto& [p, r] : g.replicated)
    for (const auto& a : r.arms)
      if (g.replicated.contains(a.peer)) return false;
  return true;
}

struct TransferSummary {
  bool df_network = false;
  bool term_network = false;
  std::vector<std::string> claims;
};

// Network-level claims licensed by type-level verdicts. Nothing is claimed
// from an Inconclusive or Violated input.
inline TransferSummary report_property_transfer(const Verdict& safety, const Verdict& df, const Verdict& term) {
  TransferSummary s;
  if (safety.status != Status::Holds) return s;
  s.claims.push_back("failure handling: every reachable linear receive without a timeout waits on reliable peers");
  if (df.status == Status::Holds) {
    s.df_network = true;
    s.claims.push_back("df(N): the network only stops when finished or idle at its servers");
  }
  if (term.status == Status::Holds) {
    s.term_network = true;
    s.df_network = true;
    s.claims.push_back("term(N): every reduction sequence is bounded" +
                       (term.longest_path ? " by " + std::to_string(*term.longest_path) + " context steps" : std::string()));
  }
  return s;
}

inline CtxState initial_state(const ContextTriple& c) { return CtxState{c.delta, c.theta}; }

struct VerifyReport {
  TypecheckResult typing;
  Verdict safety;
  Verdict df;
  Verdict term;
  bool tt = false;
  TransferSummary transfer;
};

inline VerifyReport verify(const Program& p, ClosureOptions opts = {}) {
  VerifyReport r;
  r.typing = typecheck(p);
  auto ctx = initial_contexts(p);
  auto s0 = initial_state(ctx);
  r.safety = check_safety(ctx.gamma, s0, p.reliability, opts);
  r.df = check_df_types(ctx.gamma, s0, opts);
  r.term = check_term_types(ctx.gamma, s0, opts);
  r.tt = check_tt(ctx.gamma);
  if (r.typing.ok()) r.transfer = report_property_transfer(r.safety, r.df, r.term);
  return r;
}

}  // namespace magpi
