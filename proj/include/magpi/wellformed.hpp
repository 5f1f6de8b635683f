#pragma once

// Side conditions on parsed input that the grammar alone does not enforce.
// Rule names are stable; tests and tooling match on them.

#include <set>
#include <string>
#include <vector>

#include "magpi/render.hpp"
#include "magpi/syntax.hpp"

namespace magpi {

namespace rules {
inline constexpr const char* kNonemptyBranch = "nonempty-branch";
inline constexpr const char* kDistinctCouples = "distinct-couples";
inline constexpr const char* kLabelPool = "label-pool-freshness";
inline constexpr const char* kRuntimePar = "runtime-par";
inline constexpr const char* kIrreflexive = "irreflexive-reliability";
inline constexpr const char* kDisjointContexts = "disjoint-contexts";
inline constexpr const char* kUnboundVariable = "unbound-variable";
inline constexpr const char* kDuplicateBinder = "duplicate-binder";
inline constexpr const char* kUnknownFunction = "unknown-function";
inline constexpr const char* kUnknownRole = "unknown-role";
inline constexpr const char* kNestedReplication = "nested-replication";
}  // namespace rules

namespace detail {

class WellFormedness {
 public:
  WellFormedness(const std::map<Role, SourceLoc>* locs, std::vector<Diagnostic>& out) : locs_(locs), out_(out) {}

  void error(const Role& where, std::string rule, std::string msg, Severity sev = Severity::Error) {
    SourceLoc loc;
    if (locs_)
      if (auto it = locs_->find(where); it != locs_->end()) loc = it->second;
    out_.push_back(Diagnostic{sev, loc, "role " + where.value + ": " + std::move(msg), std::move(rule)});
  }

  template <typename Arm>
  void couples(const Role& where, const std::vector<Arm>& arms, const char* what) {
    if (arms.empty()) error(where, rules::kNonemptyBranch, std::string("empty ") + what + ": at least one arm is required");
    std::set<std::pair<Role, Label>> seen;
    for (const auto& a : arms)
      if (!seen.insert({a.peer, a.label}).second)
        error(where, rules::kDistinctCouples,
              std::string(what) + " has two arms for " + a.peer.value + ":" + a.label.value);
  }

  void expr(const Role& where, const Expr& e, const std::set<std::string>& bound) {
    std::visit(Overloaded{
                   [](const Literal&) {},
                   [&](const VarRef& x) {
                     if (!bound.contains(x.name)) error(where, rules::kUnboundVariable, "variable " + x.name + " is not bound");
                   },
                   [&](const Call& c) {
                     const Builtin* b = find_builtin(c.fn);
                     if (!b) error(where, rules::kUnknownFunction, "unknown function " + c.fn);
                     else if (b->params.size() != c.args.size())
                       error(where, rules::kUnknownFunction, c.fn + " expects " + std::to_string(b->params.size()) + " argument(s)");
                     for (const auto& a : c.args) expr(where, a, bound);
                   },
               },
               e.node);
  }

  void recv_arm(const Role& where, const RecvArm& a, std::set<std::string> bound) {
    std::set<std::string> local;
    for (const auto& b : a.binders) {
      if (!local.insert(b).second) error(where, rules::kDuplicateBinder, "binder " + b + " repeated in arm " + a.label.value);
      bound.insert(b);
    }
    process(where, *a.cont, bound);
  }

  void process(const Role& where, const LinearProcess& p, const std::set<std::string>& bound) {
    std::visit(Overloaded{
                   [](const Inact&) {},
                   [&](const Send& s) {
                     for (const auto& e : s.payload) expr(where, e, bound);
                     process(where, *s.cont, bound);
                   },
                   [&](const Branch& b) {
                     couples(where, b.arms, "receive");
                     for (const auto& a : b.arms) recv_arm(where, a, bound);
                     if (b.timeout) process(where, **b.timeout, bound);
                   },
                   [&](const Choice& c) {
                     if (c.arms.empty()) error(where, rules::kNonemptyBranch, "empty choice");
                     for (const auto& a : c.arms) process(where, a, bound);
                   },
               },
               p.node);
  }

  void term(const Role& where, const ProcessTerm& t) {
    std::visit(Overloaded{
                   [&](const ServerProcess& s) {
                     couples(where, s.arms, "server");
                     for (const auto& a : s.arms) recv_arm(where, a, {});
                   },
                   [&](const LinearProcess& p) { process(where, p, {}); },
                   [&](const ParTerm& p) {
                     error(where, rules::kRuntimePar, "parallel composition is a runtime-only construct");
                     term(where, *p.left);
                     term(where, *p.right);
                   },
               },
               t.node);
  }

  void session(const Role& where, const SessionType& s) {
    std::visit(Overloaded{
                   [](const EndType&) {},
                   [&](const SelectType& t) {
                     couples(where, t.arms, "selection type");
                     for (const auto& a : t.arms) session(where, *a.cont);
                   },
                   [&](const BranchType& t) {
                     couples(where, t.arms, "branch type");
                     for (const auto& a : t.arms) session(where, *a.cont);
                     if (t.timeout) session(where, **t.timeout);
                   },
                   [&](const ParType& t) {
                     error(where, rules::kRuntimePar, "parallel session types are runtime-only");
                     for (const auto& c : t.components) session(where, c);
                   },
               },
               s.node);
  }

  static void receive_labels(const SessionType& s, std::set<Label>& out) {
    std::visit(Overloaded{
                   [](const EndType&) {},
                   [&](const SelectType& t) {
                     for (const auto& a : t.arms) receive_labels(*a.cont, out);
                   },
                   [&](const BranchType& t) {
                     for (const auto& a : t.arms) {
                       out.insert(a.label);
                       receive_labels(*a.cont, out);
                     }
                     if (t.timeout) receive_labels(**t.timeout, out);
                   },
                   [&](const ParType& t) {
                     for (const auto& c : t.components) receive_labels(c, out);
                   },
               },
               s.node);
  }

  // A replicated receive's labels must never be received again by the linear
  // continuations it spawns, otherwise a request could be consumed by the
  // wrong receiver.
  void replicated(const Role& where, const ReplicatedType& r) {
    couples(where, r.arms, "replicated type");
    std::set<Label> pool;
    for (const auto& a : r.arms) pool.insert(a.label);
    for (const auto& a : r.arms) {
      session(where, *a.cont);
      std::set<Label> inner;
      receive_labels(*a.cont, inner);
      for (const auto& l : inner)
        if (pool.contains(l))
          error(where, rules::kLabelPool, "label " + l.value + " of the replicated receive is reused in its continuation");
    }
  }

 private:
  const std::map<Role, SourceLoc>* locs_;
  std::vector<Diagnostic>& out_;
};

}  // namespace detail

// Empty result iff every side condition holds.
inline std::vector<Diagnostic> check_well_formed(const Network& n, const std::map<Role, ReplicatedType>& gamma,
                                                 const std::map<Role, SessionType>& delta,
                                                 const ReliabilityRelation& r,
                                                 const std::map<Role, SourceLoc>* locations = nullptr) {
  std::vector<Diagnostic> out;
  detail::WellFormedness wf(locations, out);
  for (const auto& [role, term] : n.processes) wf.term(role, term);
  for (const auto& [role, t] : gamma) {
    wf.replicated(role, t);
    if (delta.contains(role))
      wf.error(role, rules::kDisjointContexts, "role has both a replicated and a session type");
  }
  for (const auto& [role, t] : delta) wf.session(role, t);
  for (const auto& [a, b] : r.pairs()) {
    if (a == b) wf.error(a, rules::kIrreflexive, "a role cannot be reliable with itself");
    for (const auto& x : {a, b})
      if (!n.processes.contains(x))
        wf.error(x, rules::kUnknownRole, "reliability mentions a role with no process", Severity::Warning);
  }
  for (const auto& m : n.buffer.contents())
    for (const auto& x : {m.src, m.dst})
      if (!n.processes.contains(x))
        wf.error(x, rules::kUnknownRole, "buffered message mentions a role with no process", Severity::Warning);
  return out;
}

inline std::vector<Diagnostic> check_well_formed(const Program& p) {
  return check_well_formed(p.network, p.gamma, p.delta, p.reliability, &p.role_locations);
}

}  // namespace magpi
