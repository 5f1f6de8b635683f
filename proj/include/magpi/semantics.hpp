#pragma once

// Reduction of networks over a bag buffer, parametric on a reliability
// relation: sends, linear and replicated receives, internal choice, message
// loss and timeouts that may fire at any time.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "magpi/normalize.hpp"
#include "magpi/render.hpp"
#include "magpi/status.hpp"
#include "magpi/syntax.hpp"

namespace magpi {

// ---------------------------------------------------------------------------
// Substitution and evaluation

using Substitution = std::map<std::string, Literal>;

inline Expr substitute(const Expr& e, const Substitution& s) {
  return std::visit(Overloaded{
                        [&](const Literal&) { return e; },
                        [&](const VarRef& x) {
                          auto it = s.find(x.name);
                          return it == s.end() ? e : lit(it->second);
                        },
                        [&](const Call& c) {
                          Call out{c.fn, {}};
                          for (const auto& a : c.args) out.args.push_back(substitute(a, s));
                          return Expr{std::move(out)};
                        },
                    },
                    e.node);
}

inline LinearProcess substitute(const LinearProcess& p, const Substitution& s);

inline RecvArm substitute(const RecvArm& a, const Substitution& s) {
  Substitution inner = s;
  for (const auto& b : a.binders) inner.erase(b);  // binders shadow
  return RecvArm{a.peer, a.label, a.binders, substitute(*a.cont, inner)};
}

inline LinearProcess substitute(const LinearProcess& p, const Substitution& s) {
  if (s.empty()) return p;
  return std::visit(Overloaded{
                        [](const Inact&) { return inact(); },
                        [&](const Send& x) {
                          Send out{x.peer, x.label, {}, substitute(*x.cont, s)};
                          for (const auto& e : x.payload) out.payload.push_back(substitute(e, s));
                          return LinearProcess{std::move(out)};
                        },
                        [&](const Branch& b) {
                          Branch out;
                          for (const auto& a : b.arms) out.arms.push_back(substitute(a, s));
                          if (b.timeout) out.timeout = Box<LinearProcess>(substitute(**b.timeout, s));
                          return LinearProcess{std::move(out)};
                        },
                        [&](const Choice& c) {
                          Choice out;
                          for (const auto& a : c.arms) out.arms.push_back(substitute(a, s));
                          return LinearProcess{std::move(out)};
                        },
                    },
                    p.node);
}

inline void free_vars(const Expr& e, std::set<std::string>& out) {
  std::visit(Overloaded{
                 [](const Literal&) {},
                 [&](const VarRef& x) { out.insert(x.name); },
                 [&](const Call& c) {
                   for (const auto& a : c.args) free_vars(a, out);
                 },
             },
             e.node);
}

inline std::set<std::string> free_vars(const LinearProcess& p) {
  std::set<std::string> out;
  std::visit(Overloaded{
                 [](const Inact&) {},
                 [&](const Send& x) {
                   for (const auto& e : x.payload) free_vars(e, out);
                   out.merge(free_vars(*x.cont));
                 },
                 [&](const Branch& b) {
                   for (const auto& a : b.arms) {
                     auto inner = free_vars(*a.cont);
                     for (const auto& v : a.binders) inner.erase(v);
                     out.merge(inner);
                   }
                   if (b.timeout) out.merge(free_vars(**b.timeout));
                 },
                 [&](const Choice& c) {
                   for (const auto& a : c.arms) out.merge(free_vars(a));
                 },
             },
             p.node);
  return out;
}

struct Evaluation {
  std::optional<Literal> value;
  std::string error;
};

inline Evaluation evaluate(const Expr& e) {
  return std::visit(Overloaded{
                        [](const Literal& v) { return Evaluation{v, {}}; },
                        [](const VarRef& x) { return Evaluation{std::nullopt, "free variable " + x.name}; },
                        [](const Call& c) {
                          const Builtin* b = find_builtin(c.fn);
                          if (!b) return Evaluation{std::nullopt, "unknown function " + c.fn};
                          if (b->params.size() != c.args.size())
                            return Evaluation{std::nullopt, c.fn + ": wrong number of arguments"};
                          std::vector<Literal> args;
                          for (std::size_t i = 0; i < c.args.size(); ++i) {
                            auto a = evaluate(c.args[i]);
                            if (!a.value) return a;
                            if (literal_type(*a.value) != b->params[i])
                              return Evaluation{std::nullopt, c.fn + ": argument " + std::to_string(i + 1) + " is " +
                                                                  to_string(literal_type(*a.value)) + ", expected " +
                                                                  to_string(b->params[i])};
                            args.push_back(std::move(*a.value));
                          }
                          return Evaluation{b->apply(args), {}};
                        },
                    },
                    e.node);
}

// ---------------------------------------------------------------------------
// Steps

enum class StepRule { PSend, PRecv, PBangRecv, FDrop, FTimeout, ChoiceStep, RuntimeTypeError };

inline const char* to_string(StepRule r) {
  switch (r) {
    case StepRule::PSend: return "PSend";
    case StepRule::PRecv: return "PRecv";
    case StepRule::PBangRecv: return "PBangRecv";
    case StepRule::FDrop: return "FDrop";
    case StepRule::FTimeout: return "FTimeout";
    case StepRule::ChoiceStep: return "ChoiceStep";
    case StepRule::RuntimeTypeError: return "RuntimeTypeError";
  }
  return "?";
}

struct NetStep {
  StepRule rule = StepRule::PSend;
  std::optional<Role> role;        // absent for FDrop
  std::optional<Message> message;  // produced (PSend) or consumed/dropped message
  std::optional<std::size_t> arm;  // receive arm or choice alternative
  std::string error;               // RuntimeTypeError only
};

inline std::string render(const NetStep& s) {
  std::string out = to_string(s.rule);
  if (s.role) out += " " + s.role->value;
  if (s.message) out += " " + render(*s.message);
  if (s.arm) out += " #" + std::to_string(*s.arm);
  if (!s.error.empty()) out += " (" + s.error + ")";
  return out;
}

struct NetSuccessor {
  NetStep step;
  Network next;  // unchanged for RuntimeTypeError
};

struct NetStateId {
  std::uint64_t digest = 0;
  auto operator<=>(const NetStateId&) const = default;
};

inline NetStateId state_id(const Network& n) { return NetStateId{fnv1a64(render(n))}; }

namespace detail {

inline Network with_threads(const Network& n, const Role& role, std::vector<Thread> threads) {
  Network out = n;
  out.processes[role] = compose(std::move(threads));
  return out;
}

inline const RecvArm* find_arm(const std::vector<RecvArm>& arms, const Message& m, std::size_t& index) {
  for (std::size_t i = 0; i < arms.size(); ++i)
    if (arms[i].peer == m.src && arms[i].label == m.label) {
      index = i;
      return &arms[i];
    }
  return nullptr;
}

inline Substitution bind(const RecvArm& a, const Message& m) {
  Substitution s;
  for (std::size_t i = 0; i < a.binders.size(); ++i) s[a.binders[i]] = m.payload[i];
  return s;
}

inline std::vector<Message> distinct_messages(const Buffer& b) {
  std::vector<Message> out;
  for (const auto& m : b.contents())
    if (out.empty() || !(out.back() == m)) out.push_back(m);
  return out;
}

}  // namespace detail

// Every one-step successor of a canonical, closed network, deduplicated and
// in canonical form. Receives whose (peer, label) match but whose arity does
// not are reported as RuntimeTypeError steps rather than silently ignored.
inline std::vector<NetSuccessor> enumerate_steps(const Network& n, const ReliabilityRelation& r) {
  std::vector<NetSuccessor> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](NetStep step, Network next) {
    std::string key = render(step) + "|" + render(next);
    if (seen.insert(std::move(key)).second) out.push_back({std::move(step), std::move(next)});
  };
  auto error = [&](const Role& role, std::optional<Message> m, std::string why) {
    emit(NetStep{StepRule::RuntimeTypeError, role, std::move(m), std::nullopt, std::move(why)}, n);
  };
  const auto messages = detail::distinct_messages(n.buffer);

  for (const auto& [role, term] : n.processes) {
    const std::vector<Thread> threads = flatten(term);
    for (std::size_t i = 0; i < threads.size(); ++i) {
      auto replace = [&](Thread t) {
        auto ts = threads;
        ts[i] = std::move(t);
        return ts;
      };

      if (auto* srv = std::get_if<ServerProcess>(&threads[i])) {
        for (const auto& m : messages) {
          if (m.dst != role) continue;
          std::size_t k = 0;
          const RecvArm* a = detail::find_arm(srv->arms, m, k);
          if (!a) continue;
          if (a->binders.size() != m.payload.size()) {
            error(role, m, "arity mismatch at replicated receive " + a->label.value);
            continue;
          }
          auto ts = threads;
          ts.emplace_back(substitute(*a->cont, detail::bind(*a, m)));
          Network next = detail::with_threads(n, role, std::move(ts));
          next.buffer.remove_one(m);
          emit(NetStep{StepRule::PBangRecv, role, m, k, {}}, std::move(next));
        }
        continue;
      }

      const auto& proc = std::get<LinearProcess>(threads[i]);
      std::visit(Overloaded{
                     [](const Inact&) {},
                     [&](const Send& s) {
                       Message m{role, s.peer, s.label, {}};
                       for (const auto& e : s.payload) {
                         auto v = evaluate(e);
                         if (!v.value) {
                           error(role, std::nullopt, "cannot evaluate payload of " + s.label.value + ": " + v.error);
                           return;
                         }
                         m.payload.push_back(std::move(*v.value));
                       }
                       Network next = detail::with_threads(n, role, replace(*s.cont));
                       next.buffer.add(m);
                       emit(NetStep{StepRule::PSend, role, std::move(m), std::nullopt, {}}, std::move(next));
                     },
                     [&](const Branch& b) {
                       for (const auto& m : messages) {
                         if (m.dst != role) continue;
                         std::size_t k = 0;
                         const RecvArm* a = detail::find_arm(b.arms, m, k);
                         if (!a) continue;
                         if (a->binders.size() != m.payload.size()) {
                           error(role, m, "arity mismatch at receive " + a->label.value);
                           continue;
                         }
                         Network next = detail::with_threads(n, role, replace(substitute(*a->cont, detail::bind(*a, m))));
                         next.buffer.remove_one(m);
                         emit(NetStep{StepRule::PRecv, role, m, k, {}}, std::move(next));
                       }
                       if (b.timeout)
                         emit(NetStep{StepRule::FTimeout, role, std::nullopt, std::nullopt, {}},
                              detail::with_threads(n, role, replace(**b.timeout)));
                     },
                     [&](const Choice& c) {
                       for (std::size_t k = 0; k < c.arms.size(); ++k)
                         emit(NetStep{StepRule::ChoiceStep, role, std::nullopt, k, {}},
                              detail::with_threads(n, role, replace(c.arms[k])));
                     },
                 },
                 proc.node);
    }
  }

  for (const auto& m : messages) {
    if (r.reliable(m.src, m.dst)) continue;
    Network next = n;
    next.buffer.remove_one(m);
    emit(NetStep{StepRule::FDrop, std::nullopt, m, std::nullopt, {}}, std::move(next));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeded simulation

enum class DropPolicy {
  Any,
  NeverDrop,             // no drops; timeouts only when nothing else can happen
  EagerDrop,             // a drop is taken whenever one is possible
  NeverSpuriousTimeout,  // no timeout while a consumable message is buffered
};

inline const char* to_string(DropPolicy p) {
  switch (p) {
    case DropPolicy::Any: return "any";
    case DropPolicy::NeverDrop: return "never-drop";
    case DropPolicy::EagerDrop: return "eager-drop";
    case DropPolicy::NeverSpuriousTimeout: return "never-spurious-timeout";
  }
  return "?";
}

inline std::optional<DropPolicy> parse_policy(const std::string& s) {
  for (auto p : {DropPolicy::Any, DropPolicy::NeverDrop, DropPolicy::EagerDrop, DropPolicy::NeverSpuriousTimeout})
    if (s == to_string(p)) return p;
  return std::nullopt;
}

namespace detail {

inline bool has_consumable(const Network& n, const Role& role) {
  for (const auto& t : flatten(n.processes.at(role))) {
    auto* p = std::get_if<LinearProcess>(&t);
    if (!p) continue;
    auto* b = std::get_if<Branch>(&p->node);
    if (!b || !b->timeout) continue;
    for (const auto& m : n.buffer.contents()) {
      std::size_t k = 0;
      if (m.dst == role && find_arm(b->arms, m, k)) return true;
    }
  }
  return false;
}

inline std::vector<NetSuccessor> apply_policy(const Network& n, std::vector<NetSuccessor> steps, DropPolicy policy) {
  auto is = [](StepRule r) { return [r](const NetSuccessor& s) { return s.step.rule == r; }; };
  switch (policy) {
    case DropPolicy::Any: break;
    case DropPolicy::NeverDrop: {
      std::erase_if(steps, is(StepRule::FDrop));
      bool other = std::any_of(steps.begin(), steps.end(), [](const auto& s) { return s.step.rule != StepRule::FTimeout; });
      if (other) std::erase_if(steps, is(StepRule::FTimeout));
      break;
    }
    case DropPolicy::EagerDrop:
      if (std::any_of(steps.begin(), steps.end(), is(StepRule::FDrop))) std::erase_if(steps, std::not_fn(is(StepRule::FDrop)));
      break;
    case DropPolicy::NeverSpuriousTimeout:
      std::erase_if(steps, [&](const NetSuccessor& s) {
        return s.step.rule == StepRule::FTimeout && has_consumable(n, *s.step.role);
      });
      break;
  }
  return steps;
}

}  // namespace detail

struct TraceEntry {
  NetStep step;
  NetStateId pre;
  NetStateId post;
};

struct Trace {
  std::vector<TraceEntry> steps;
  Network final_network;
  bool failed = false;  // stopped on a RuntimeTypeError
  std::string failure;
};

// Deterministic in (network, relation, seed, max_steps, policy).
inline Trace simulate(const Network& n, const ReliabilityRelation& r, std::uint64_t seed, std::size_t max_steps,
                      DropPolicy policy = DropPolicy::Any) {
  std::mt19937_64 rng(seed);
  Trace trace;
  trace.final_network = n;
  while (trace.steps.size() < max_steps) {
    auto steps = detail::apply_policy(trace.final_network, enumerate_steps(trace.final_network, r), policy);
    if (steps.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, steps.size() - 1);
    auto& chosen = steps[pick(rng)];
    NetStateId pre = state_id(trace.final_network);
    if (chosen.step.rule == StepRule::RuntimeTypeError) {
      trace.failed = true;
      trace.failure = chosen.step.error;
      trace.steps.push_back({chosen.step, pre, pre});
      break;
    }
    trace.final_network = std::move(chosen.next);
    trace.steps.push_back({std::move(chosen.step), pre, state_id(trace.final_network)});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Reachability

struct NetExploration {
  std::vector<Network> states;                         // index 0 is the initial network
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> terminals;                  // states with no successor
  std::vector<std::pair<std::size_t, NetStep>> errors; // RuntimeTypeError steps seen
  bool exhausted = false;

  std::set<NetStateId> state_ids() const {
    std::set<NetStateId> out;
    for (const auto& s : states) out.insert(state_id(s));
    return out;
  }
  std::vector<Network> terminal_networks() const {
    std::vector<Network> out;
    for (auto i : terminals) out.push_back(states[i]);
    return out;
  }
};

// Breadth-first search with canonical-form deduplication. Error steps are
// recorded but not followed; a state whose only steps are errors counts as
// terminal.
inline NetExploration explore_network(const Network& n, const ReliabilityRelation& r, StateBudget budget = {}) {
  NetExploration ex;
  std::unordered_map<std::string, std::size_t> index;
  Network start = normalize(n);
  index.emplace(render(start), 0);
  ex.states.push_back(std::move(start));
  std::deque<std::size_t> frontier{0};
  bool overflow = false;
  while (!frontier.empty()) {
    std::size_t cur = frontier.front();
    frontier.pop_front();
    bool any = false;
    for (auto& succ : enumerate_steps(ex.states[cur], r)) {
      if (succ.step.rule == StepRule::RuntimeTypeError) {
        ex.errors.emplace_back(cur, std::move(succ.step));
        continue;
      }
      any = true;
      std::string key = render(succ.next);
      auto it = index.find(key);
      if (it == index.end()) {
        if (ex.states.size() >= budget.max_states) {
          overflow = true;
          continue;
        }
        it = index.emplace(std::move(key), ex.states.size()).first;
        ex.states.push_back(std::move(succ.next));
        frontier.push_back(it->second);
      }
      ex.edges.emplace_back(cur, it->second);
    }
    if (!any) ex.terminals.push_back(cur);
  }
  ex.exhausted = !overflow;
  return ex;
}

// A stuck network is acceptable when every role is finished or is a bare
// replicated receive with no spawned work left.
inline bool is_acceptable_terminal(const Network& n) {
  for (const auto& [role, term] : n.processes) {
    auto threads = flatten(term);
    bool finished = threads.size() == 1 && is_inact(threads.front());
    bool idle_server = threads.size() == 1 && std::holds_alternative<ServerProcess>(threads.front());
    if (!finished && !idle_server) return false;
  }
  return true;
}

struct NetPropertyResult {
  Status status = Status::Inconclusive;
  std::optional<std::size_t> offending_state;
  std::string detail;
};

inline NetPropertyResult check_df_network(const NetExploration& ex) {
  if (!ex.exhausted) return {Status::Inconclusive, std::nullopt, "exploration budget exceeded"};
  for (auto t : ex.terminals)
    if (!is_acceptable_terminal(ex.states[t]))
      return {Status::Violated, t, "stuck network: " + render(ex.states[t])};
  return {Status::Holds, std::nullopt, {}};
}

namespace detail {

// Kahn's algorithm; returns the longest path length if the graph is acyclic.
inline std::optional<std::size_t> longest_path_if_acyclic(std::size_t n,
                                                          const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::size_t> indeg(n, 0), depth(n, 0);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    ++indeg[b];
  }
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) q.push_back(i);
  std::size_t visited = 0, longest = 0;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    ++visited;
    longest = std::max(longest, depth[v]);
    for (auto w : adj[v]) {
      depth[w] = std::max(depth[w], depth[v] + 1);
      if (--indeg[w] == 0) q.push_back(w);
    }
  }
  if (visited != n) return std::nullopt;
  return longest;
}

}  // namespace detail

// Termination: deadlock freedom plus a finite bound on every reduction
// sequence, i.e. an acyclic reachable graph.
inline NetPropertyResult check_term_network(const NetExploration& ex) {
  auto df = check_df_network(ex);
  if (df.status != Status::Holds) return df;
  auto k = detail::longest_path_if_acyclic(ex.states.size(), ex.edges);
  if (!k) return {Status::Violated, std::nullopt, "reachable graph has a cycle"};
  return {Status::Holds, std::nullopt, "longest reduction sequence " + std::to_string(*k)};
}

// Every reachable linear receive without a timeout only waits on reliable
// peers. Replicated receives are exempt.
inline NetPropertyResult check_failure_handling(const NetExploration& ex, const ReliabilityRelation& r) {
  if (!ex.exhausted) return {Status::Inconclusive, std::nullopt, "exploration budget exceeded"};
  for (std::size_t i = 0; i < ex.states.size(); ++i) {
    for (const auto& [role, term] : ex.states[i].processes) {
      for (const auto& t : flatten(term)) {
        auto* p = std::get_if<LinearProcess>(&t);
        if (!p) continue;
        auto* b = std::get_if<Branch>(&p->node);
        if (!b || b->timeout) continue;
        for (const auto& a : b->arms)
          if (!r.reliable(role, a.peer))
            return {Status::Violated, i,
                    "role " + role.value + " waits on unreliable peer " + a.peer.value + " without a timeout"};
      }
    }
  }
  return {Status::Holds, std::nullopt, {}};
}

}  // namespace magpi
