#pragma once

// Derivation search for Gamma; Delta; Theta |- N.
//
// Delta is split by role domain first (a role's entry can only type that
// role's process). Inside a role, the components of a parallel entry are
// matched against the role's threads by backtracking; components left over
// must be `end` and are absorbed by a padding `0` thread. Buffer messages
// carry literal payloads, so each has exactly one message type and matching
// against Theta is multiset containment.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "magpi/contexts.hpp"
#include "magpi/normalize.hpp"
#include "magpi/render.hpp"
#include "magpi/syntax.hpp"

namespace magpi {

enum class TypingRule { TS, TVar, TVal, T0, TSend, TRecv, TBang, TPar1, TPar2, TParProc, TEmpty, TBuf, TCall, TChoice };

inline const char* to_string(TypingRule r) {
  switch (r) {
    case TypingRule::TS: return "T-S";
    case TypingRule::TVar: return "T-Var";
    case TypingRule::TVal: return "T-Val";
    case TypingRule::T0: return "T-0";
    case TypingRule::TSend: return "T-Send";
    case TypingRule::TRecv: return "T-Recv";
    case TypingRule::TBang: return "T-Bang";
    case TypingRule::TPar1: return "T-Par1";
    case TypingRule::TPar2: return "T-Par2";
    case TypingRule::TParProc: return "T-ParProc";
    case TypingRule::TEmpty: return "T-Empty";
    case TypingRule::TBuf: return "T-Buf";
    case TypingRule::TCall: return "T-Call";
    case TypingRule::TChoice: return "T-Choice";
  }
  return "?";
}

// Judged entities.
struct RoleProcess {  // p <| P
  Role role;
  ProcessTerm term;
};
struct RoleType {  // p : S
  Role role;
  SessionType type;
};
struct ValueJudgement {  // c : B
  Expr expr;
  BaseType type;
};
using Judged = std::variant<Network, RoleProcess, RoleType, ValueJudgement, Buffer>;

inline std::string render(const Judged& j) {
  return std::visit(Overloaded{
                        [](const Network& n) { return render(n); },
                        [](const RoleProcess& p) { return p.role.value + " <| " + render(p.term); },
                        [](const RoleType& t) { return t.role.value + " : " + render(t.type); },
                        [](const ValueJudgement& v) { return render(v.expr) + " : " + to_string(v.type); },
                        [](const Buffer& b) { return render(b); },
                    },
                    j);
}

// One rule instance. Gamma's replicated part is global to a derivation, so
// only the variable part is recorded per node.
struct Derivation {
  TypingRule rule = TypingRule::T0;
  std::vector<Derivation> premises;
  std::map<std::string, BaseType> vars;
  DeltaCtx delta;
  ThetaCtx theta;
  Judged subject;
};

inline std::string render_judgement(const Derivation& d) {
  std::string vars = "{";
  bool first = true;
  for (const auto& [x, b] : d.vars) {
    if (!first) vars += ", ";
    first = false;
    vars += x + ": " + to_string(b);
  }
  vars += "}";
  return vars + "; " + render(d.delta) + "; " + render(d.theta) + " |- " + render(d.subject);
}

inline std::size_t derivation_size(const Derivation& d) {
  std::size_t n = 1;
  for (const auto& p : d.premises) n += derivation_size(p);
  return n;
}

struct TypecheckResult {
  std::optional<Derivation> derivation;
  std::optional<Diagnostic> error;
  std::optional<Role> failing_role;
  bool ok() const { return derivation.has_value(); }
};

// v : B for a closed value, or Gamma(x) = B for a variable.
inline bool typecheck_value(const Expr& e, BaseType b, const std::map<std::string, BaseType>& vars,
                            std::string* why = nullptr) {
  return std::visit(Overloaded{
                        [&](const Literal& v) {
                          if (literal_type(v) == b) return true;
                          if (why) *why = render(v) + " is not a " + to_string(b);
                          return false;
                        },
                        [&](const VarRef& x) {
                          auto it = vars.find(x.name);
                          if (it == vars.end()) {
                            if (why) *why = "variable " + x.name + " is unbound";
                            return false;
                          }
                          if (it->second == b) return true;
                          if (why) *why = "variable " + x.name + " has type " + to_string(it->second) + ", expected " + to_string(b);
                          return false;
                        },
                        [&](const Call& c) {
                          const Builtin* f = find_builtin(c.fn);
                          if (!f) {
                            if (why) *why = "unknown function " + c.fn;
                            return false;
                          }
                          if (f->result != b) {
                            if (why) *why = c.fn + " returns " + to_string(f->result) + ", expected " + to_string(b);
                            return false;
                          }
                          if (f->params.size() != c.args.size()) {
                            if (why) *why = c.fn + ": wrong number of arguments";
                            return false;
                          }
                          for (std::size_t i = 0; i < c.args.size(); ++i)
                            if (!typecheck_value(c.args[i], f->params[i], vars, why)) return false;
                          return true;
                        },
                    },
                    e.node);
}

inline bool typecheck_value(const Literal& v, BaseType b) { return literal_type(v) == b; }

namespace detail {

class Typechecker {
 public:
  explicit Typechecker(const GammaCtx& g) : g_(g) {}

  struct Failure {
    int depth = -1;
    std::string message;
    std::string rule;
    std::optional<Role> role;
  };
  const Failure& failure() const { return failure_; }

  std::optional<Derivation> network(const Network& n, const DeltaCtx& delta, const ThetaCtx& theta) {
    auto procs = processes(n, delta);
    if (!procs) return std::nullopt;
    failure_ = {};
    auto buf = buffer(n.buffer, theta, 1);
    if (!buf) return std::nullopt;
    Derivation d{TypingRule::TPar1, {}, g_.vars, delta, theta, n};
    d.premises.push_back(std::move(*procs));
    d.premises.push_back(std::move(*buf));
    return d;
  }

 private:
  using Vars = std::map<std::string, BaseType>;

  void fail(int depth, const Role* role, std::string msg, TypingRule rule) {
    if (depth <= failure_.depth) return;
    failure_.depth = depth;
    failure_.message = (role ? "role " + role->value + ": " : std::string()) + std::move(msg);
    failure_.rule = to_string(rule);
    failure_.role = role ? std::optional<Role>(*role) : std::nullopt;
  }

  static DeltaCtx single(const Role& p, const SessionType& s) {
    DeltaCtx d;
    d.entries.emplace(p, normalize(s));
    return d;
  }

  std::optional<Derivation> value(const Vars& vars, const Expr& e, BaseType b, const Role& p, int depth) {
    Derivation d{TypingRule::TVal, {}, vars, {}, {}, ValueJudgement{e, b}};
    return std::visit(Overloaded{
                          [&](const Literal& v) -> std::optional<Derivation> {
                            if (literal_type(v) != b) {
                              fail(depth, &p, "value " + render(v) + " is not of type " + to_string(b), TypingRule::TVal);
                              return std::nullopt;
                            }
                            return d;
                          },
                          [&](const VarRef&) -> std::optional<Derivation> {
                            std::string why;
                            if (!typecheck_value(e, b, vars, &why)) {
                              fail(depth, &p, why, TypingRule::TVar);
                              return std::nullopt;
                            }
                            d.rule = TypingRule::TVar;
                            return d;
                          },
                          [&](const Call& c) -> std::optional<Derivation> {
                            const Builtin* f = find_builtin(c.fn);
                            if (!f || f->result != b || f->params.size() != c.args.size()) {
                              fail(depth, &p,
                                   f ? c.fn + " does not produce " + to_string(b) + " from " + std::to_string(c.args.size()) +
                                           " argument(s)"
                                     : "unknown function " + c.fn,
                                   TypingRule::TCall);
                              return std::nullopt;
                            }
                            d.rule = TypingRule::TCall;
                            for (std::size_t i = 0; i < c.args.size(); ++i) {
                              auto a = value(vars, c.args[i], f->params[i], p, depth + 1);
                              if (!a) return std::nullopt;
                              d.premises.push_back(std::move(*a));
                            }
                            return d;
                          },
                      },
                      e.node);
  }

  template <typename Arms>
  static std::set<std::pair<Role, Label>> couples(const Arms& arms) {
    std::set<std::pair<Role, Label>> out;
    for (const auto& a : arms) out.emplace(a.peer, a.label);
    return out;
  }

  static const TypeArm* find_type_arm(const std::vector<TypeArm>& arms, const Role& peer, const Label& label) {
    for (const auto& a : arms)
      if (a.peer == peer && a.label == label) return &a;
    return nullptr;
  }

  static std::string describe(const std::set<std::pair<Role, Label>>& cs) {
    std::string out = "{";
    bool first = true;
    for (const auto& [r, l] : cs) {
      if (!first) out += ", ";
      first = false;
      out += r.value + ":" + l.value;
    }
    return out + "}";
  }

  // Receive arms under their type arms, shared by linear and replicated receives.
  bool recv_arms(const Vars& vars, const Role& p, const std::vector<RecvArm>& arms, const std::vector<TypeArm>& tarms,
                 int depth, Derivation& d, TypingRule rule) {
    if (couples(arms) != couples(tarms)) {
      fail(depth, &p, "receive offers " + describe(couples(arms)) + " but the type expects " + describe(couples(tarms)),
           rule);
      return false;
    }
    for (const auto& a : arms) {
      const TypeArm* t = find_type_arm(tarms, a.peer, a.label);
      if (a.binders.size() != t->payload.size()) {
        fail(depth, &p,
             "arm " + a.peer.value + ":" + a.label.value + " binds " + std::to_string(a.binders.size()) +
                 " variable(s) but the type carries " + std::to_string(t->payload.size()),
             rule);
        return false;
      }
      Vars inner = vars;
      for (std::size_t i = 0; i < a.binders.size(); ++i) inner[a.binders[i]] = t->payload[i];
      auto cont = linear(inner, p, *a.cont, *t->cont, depth + 1);
      if (!cont) return false;
      d.premises.push_back(std::move(*cont));
    }
    return true;
  }

  std::optional<Derivation> linear(const Vars& vars, const Role& p, const LinearProcess& proc, const SessionType& s,
                                   int depth) {
    Derivation d{TypingRule::T0, {}, vars, single(p, s), {}, RoleProcess{p, lin(proc)}};
    auto head = [&] { return Derivation{TypingRule::TS, {}, vars, single(p, s), {}, RoleType{p, normalize(s)}}; };
    return std::visit(
        Overloaded{
            [&](const Inact&) -> std::optional<Derivation> {
              if (!end_pred(s)) {
                fail(depth, &p, "process has finished but its type is " + render(s), TypingRule::T0);
                return std::nullopt;
              }
              return d;
            },
            [&](const Send& x) -> std::optional<Derivation> {
              auto* t = std::get_if<SelectType>(&s.node);
              if (!t) {
                fail(depth, &p, "process sends " + x.peer.value + ":" + x.label.value + " but its type is " + render(s),
                     TypingRule::TSend);
                return std::nullopt;
              }
              const TypeArm* a = find_type_arm(t->arms, x.peer, x.label);
              if (!a) {
                fail(depth, &p, "send " + x.peer.value + ":" + x.label.value + " is not offered by " + render(s),
                     TypingRule::TSend);
                return std::nullopt;
              }
              if (a->payload.size() != x.payload.size()) {
                fail(depth, &p,
                     "send " + x.peer.value + ":" + x.label.value + " carries " + std::to_string(x.payload.size()) +
                         " value(s) but the type expects " + std::to_string(a->payload.size()),
                     TypingRule::TSend);
                return std::nullopt;
              }
              d.rule = TypingRule::TSend;
              d.premises.push_back(head());
              for (std::size_t i = 0; i < x.payload.size(); ++i) {
                auto v = value(vars, x.payload[i], a->payload[i], p, depth + 1);
                if (!v) return std::nullopt;
                d.premises.push_back(std::move(*v));
              }
              auto cont = linear(vars, p, *x.cont, *a->cont, depth + 1);
              if (!cont) return std::nullopt;
              d.premises.push_back(std::move(*cont));
              return d;
            },
            [&](const Branch& b) -> std::optional<Derivation> {
              auto* t = std::get_if<BranchType>(&s.node);
              if (!t) {
                fail(depth, &p, "process receives but its type is " + render(s), TypingRule::TRecv);
                return std::nullopt;
              }
              if (b.timeout.has_value() != t->timeout.has_value()) {
                fail(depth, &p,
                     b.timeout ? "process has a timeout branch the type does not define"
                               : "type defines a timeout branch the process does not implement",
                     TypingRule::TRecv);
                return std::nullopt;
              }
              d.rule = TypingRule::TRecv;
              d.premises.push_back(head());
              if (!recv_arms(vars, p, b.arms, t->arms, depth, d, TypingRule::TRecv)) return std::nullopt;
              if (b.timeout) {
                auto cont = linear(vars, p, **b.timeout, **t->timeout, depth + 1);
                if (!cont) return std::nullopt;
                d.premises.push_back(std::move(*cont));
              }
              return d;
            },
            [&](const Choice& c) -> std::optional<Derivation> {
              d.rule = TypingRule::TChoice;
              for (const auto& alt : c.arms) {
                auto a = linear(vars, p, alt, s, depth + 1);
                if (!a) return std::nullopt;
                d.premises.push_back(std::move(*a));
              }
              return d;
            },
        },
        proc.node);
  }

  std::optional<Derivation> server(const Role& p, const ServerProcess& srv, int depth) {
    auto it = g_.replicated.find(p);
    if (it == g_.replicated.end()) {
      fail(depth, &p, "replicated receive without a replicated type", TypingRule::TBang);
      return std::nullopt;
    }
    Derivation d{TypingRule::TBang, {}, g_.vars, {}, {}, RoleProcess{p, ProcessTerm{srv}}};
    if (!recv_arms(g_.vars, p, srv.arms, it->second.arms, depth, d, TypingRule::TBang)) return std::nullopt;
    return d;
  }

  // Items composed in parallel inside one role.
  struct Item {
    Derivation d;
    ProcessTerm term;
  };

  static Derivation chain_par_proc(const Role& p, std::vector<Item> items, const Vars& vars) {
    Derivation acc = std::move(items.back().d);
    ProcessTerm term = std::move(items.back().term);
    for (std::size_t i = items.size() - 1; i-- > 0;) {
      Derivation node{TypingRule::TParProc, {}, vars, ctx_add(items[i].d.delta, acc.delta), {},
                      RoleProcess{p, par(items[i].term, term)}};
      term = par(std::move(items[i].term), std::move(term));
      node.premises.push_back(std::move(items[i].d));
      node.premises.push_back(std::move(acc));
      acc = std::move(node);
    }
    return acc;
  }

  std::optional<Derivation> role(const Role& p, const ProcessTerm& term, const std::optional<SessionType>& entry) {
    std::vector<Thread> threads = flatten(normalize(term));
    std::erase_if(threads, is_inact);
    std::vector<SessionType> comps = entry ? components(*entry) : std::vector<SessionType>{};

    std::vector<std::size_t> lin_idx;
    std::vector<Item> items;
    for (std::size_t i = 0; i < threads.size(); ++i) {
      if (auto* s = std::get_if<ServerProcess>(&threads[i])) {
        auto d = server(p, *s, 1);
        if (!d) return std::nullopt;
        items.push_back({std::move(*d), ProcessTerm{*s}});
      } else {
        lin_idx.push_back(i);
      }
    }
    if (lin_idx.size() > comps.size()) {
      fail(0, &p,
           std::to_string(lin_idx.size()) + " linear thread(s) but only " + std::to_string(comps.size()) +
               " session type(s)",
           TypingRule::TParProc);
      return std::nullopt;
    }

    // compat memo keyed by (thread, rendered component)
    std::map<std::pair<std::size_t, std::string>, std::optional<Derivation>> memo;
    auto compat = [&](std::size_t t, std::size_t c) -> const std::optional<Derivation>& {
      auto key = std::make_pair(t, render(comps[c]));
      auto it = memo.find(key);
      if (it == memo.end())
        it = memo.emplace(key, linear(g_.vars, p, std::get<LinearProcess>(threads[lin_idx[t]]), comps[c], 1)).first;
      return it->second;
    };
    std::vector<std::size_t> assign(lin_idx.size());
    std::vector<bool> used(comps.size(), false);
    std::function<bool(std::size_t)> search = [&](std::size_t t) -> bool {
      if (t == lin_idx.size()) {
        for (std::size_t c = 0; c < comps.size(); ++c)
          if (!used[c] && !comps[c].is_end()) {
            fail(0, &p, "session type " + render(comps[c]) + " has no process to implement it", TypingRule::T0);
            return false;
          }
        return true;
      }
      std::set<std::string> tried;
      for (std::size_t c = 0; c < comps.size(); ++c) {
        if (used[c] || !tried.insert(render(comps[c])).second) continue;
        if (!compat(t, c)) continue;
        used[c] = true;
        assign[t] = c;
        if (search(t + 1)) return true;
        used[c] = false;
      }
      return false;
    };
    if (!search(0)) return std::nullopt;

    for (std::size_t t = 0; t < lin_idx.size(); ++t)
      items.push_back({*compat(t, assign[t]), ProcessTerm{std::get<LinearProcess>(threads[lin_idx[t]])}});
    std::vector<SessionType> leftover;
    for (std::size_t c = 0; c < comps.size(); ++c)
      if (!used[c]) leftover.push_back(comps[c]);
    if (!leftover.empty() || items.empty()) {
      DeltaCtx pad;
      if (!leftover.empty())
        pad.entries.emplace(p, normalize(leftover.size() == 1 ? leftover.front() : SessionType{ParType{leftover}}));
      items.push_back({Derivation{TypingRule::T0, {}, g_.vars, pad, {}, RoleProcess{p, lin(inact())}}, lin(inact())});
    }
    return chain_par_proc(p, std::move(items), g_.vars);
  }

  std::optional<Derivation> processes(const Network& n, const DeltaCtx& delta) {
    std::vector<std::pair<Role, Derivation>> parts;
    for (const auto& [p, term] : n.processes) {
      std::optional<SessionType> entry;
      if (auto it = delta.entries.find(p); it != delta.entries.end()) entry = it->second;
      failure_ = {};  // roles are independent; stale failures from a successful role are irrelevant
      auto d = role(p, term, entry);
      if (!d) return std::nullopt;
      parts.emplace_back(p, std::move(*d));
    }
    failure_ = {};
    for (const auto& [p, s] : delta.entries) {
      if (n.processes.contains(p)) continue;
      if (!end_pred(s)) {
        fail(0, &p, "role is typed " + render(s) + " but has no process", TypingRule::TPar2);
        return std::nullopt;
      }
      parts.emplace_back(p, Derivation{TypingRule::T0, {}, g_.vars, single(p, s), {}, RoleProcess{p, lin(inact())}});
    }
    if (parts.empty()) {
      Network empty;
      return Derivation{TypingRule::TEmpty, {}, g_.vars, {}, {}, empty};
    }
    // right-nested T-Par2 over roles
    Derivation acc = std::move(parts.back().second);
    Network rest;
    rest.processes.emplace(parts.back().first, std::get<RoleProcess>(acc.subject).term);
    for (std::size_t i = parts.size() - 1; i-- > 0;) {
      auto& [p, d] = parts[i];
      rest.processes.emplace(p, std::get<RoleProcess>(d.subject).term);
      DeltaCtx joined = acc.delta;
      for (const auto& e : d.delta.entries) joined.entries.emplace(e);
      Derivation node{TypingRule::TPar2, {}, g_.vars, joined, {}, rest};
      node.premises.push_back(std::move(d));
      node.premises.push_back(std::move(acc));
      acc = std::move(node);
    }
    return acc;
  }

  std::optional<Derivation> buffer(const Buffer& b, const ThetaCtx& theta, int depth) {
    if (b.empty()) return Derivation{TypingRule::TEmpty, {}, g_.vars, {}, theta, b};
    const Message& m = b.contents().back();
    MessageType t = type_of(m);
    ThetaCtx rest_theta = theta;
    if (!rest_theta.remove_one(t)) {
      fail(depth, nullptr, "buffered message " + render(m) + " has no matching message type " + render(t) + " in Theta",
           TypingRule::TBuf);
      return std::nullopt;
    }
    Buffer rest = b;
    rest.remove_one(m);
    Derivation d{TypingRule::TBuf, {}, g_.vars, {}, theta, b};
    for (std::size_t i = 0; i < m.payload.size(); ++i)
      d.premises.push_back(Derivation{TypingRule::TVal, {}, g_.vars, {}, {}, ValueJudgement{lit(m.payload[i]), t.payload[i]}});
    auto tail = buffer(rest, rest_theta, depth + 1);
    if (!tail) return std::nullopt;
    d.premises.push_back(std::move(*tail));
    return d;
  }

  const GammaCtx& g_;
  Failure failure_;
};

}  // namespace detail

inline TypecheckResult typecheck(const Network& n, const ContextTriple& ctx) {
  detail::Typechecker tc(ctx.gamma);
  DeltaCtx delta;
  for (const auto& [p, s] : ctx.delta.entries) delta.entries.emplace(p, normalize(s));
  TypecheckResult r;
  r.derivation = tc.network(normalize(n), delta, ctx.theta);
  if (!r.derivation) {
    const auto& f = tc.failure();
    r.error = Diagnostic{Severity::Error, {}, f.message.empty() ? "no derivation" : f.message, f.rule};
    r.failing_role = f.role;
  }
  return r;
}

// Contexts a parsed program is checked under: the declared types, and the
// literal types of the initially buffered messages.
inline ContextTriple initial_contexts(const Program& p) {
  ContextTriple c;
  c.gamma.replicated = p.gamma;
  for (const auto& [r, s] : p.delta) c.delta.entries.emplace(r, normalize(s));
  for (const auto& m : p.network.buffer.contents()) c.theta.add(type_of(m));
  return c;
}

inline TypecheckResult typecheck(const Program& p) {
  auto r = typecheck(p.network, initial_contexts(p));
  if (r.error && r.failing_role)
    if (auto it = p.role_locations.find(*r.failing_role); it != p.role_locations.end()) r.error->location = it->second;
  return r;
}

}  // namespace magpi
