#pragma once

// Type-level transition system: outputs into the type buffer, communication
// with linear branches and with replicated server types, and timeouts.

#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "magpi/contexts.hpp"
#include "magpi/status.hpp"

namespace magpi {

struct Action {
  enum class Kind { Output, Comm, Timeout };
  Kind kind = Kind::Output;
  Role src;  // the timing-out role for Timeout
  Role dst;
  Label label;

  static Action output(Role p, Role q, Label m) { return {Kind::Output, std::move(p), std::move(q), std::move(m)}; }
  static Action comm(Role p, Role q, Label m) { return {Kind::Comm, std::move(p), std::move(q), std::move(m)}; }
  static Action timeout(Role p) { return {Kind::Timeout, std::move(p), {}, {}}; }

  bool operator==(const Action&) const = default;
};

inline std::string render(const Action& a) {
  switch (a.kind) {
    case Action::Kind::Output: return a.src.value + "⊕" + a.dst.value + ":" + a.label.value;
    case Action::Kind::Comm: return a.src.value + "→" + a.dst.value + ":" + a.label.value;
    case Action::Kind::Timeout: return a.src.value + ":⏱";
  }
  return "?";
}

struct CtxState {
  DeltaCtx delta;
  ThetaCtx theta;
  bool operator==(const CtxState&) const = default;
};

inline std::string render(const CtxState& s) { return render(s.delta) + " ; " + render(s.theta); }

struct CtxTransition {
  Action action;
  CtxState next;
  bool replicated = false;  // fired through a server type in Gamma
};

namespace detail {

inline std::vector<SessionType> distinct_components(const SessionType& s) {
  std::vector<SessionType> out;
  for (auto& c : components(s))
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  return out;
}

}  // namespace detail

// Complete successor set of a canonical state. Rules fire on any single
// parallel component of a role's entry.
inline std::vector<CtxTransition> ctx_transitions(const GammaCtx& g, const CtxState& s) {
  std::vector<CtxTransition> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](Action a, CtxState next, bool rep) {
    if (seen.insert(render(a) + "|" + render(next)).second) out.push_back({std::move(a), std::move(next), rep});
  };

  for (const auto& [p, entry] : s.delta.entries) {
    for (const auto& c : detail::distinct_components(entry)) {
      auto rest = [&] { return remove_component(s.delta, p, c); };
      std::visit(Overloaded{
                     [](const EndType&) {},
                     [](const ParType&) {},
                     [&](const SelectType& t) {
                       for (const auto& a : t.arms) {
                         CtxState next{ctx_add(rest(), p, *a.cont), s.theta};
                         next.theta.add(MessageType{p, a.peer, a.label, a.payload});
                         emit(Action::output(p, a.peer, a.label), std::move(next), false);
                       }
                     },
                     [&](const BranchType& t) {
                       for (const auto& a : t.arms) {
                         MessageType m{a.peer, p, a.label, a.payload};
                         CtxState next{ctx_add(rest(), p, *a.cont), s.theta};
                         if (next.theta.remove_one(m)) emit(Action::comm(a.peer, p, a.label), std::move(next), false);
                       }
                       if (t.timeout) emit(Action::timeout(p), CtxState{ctx_add(rest(), p, **t.timeout), s.theta}, false);
                     },
                 },
                 c.node);
    }
  }

  for (const auto& [p, r] : g.replicated) {
    for (const auto& a : r.arms) {
      MessageType m{a.peer, p, a.label, a.payload};
      CtxState next{ctx_add(s.delta, p, *a.cont), s.theta};
      if (next.theta.remove_one(m)) emit(Action::comm(a.peer, p, a.label), std::move(next), true);
    }
  }
  return out;
}

// Default cap on server-type firings along any single path.
inline constexpr std::size_t kDefaultBangBound = 64;

struct ClosureOptions {
  std::size_t max_states = kDefaultStateBudget;
  std::size_t bang_bound = kDefaultBangBound;
};

struct CtxEdge {
  std::size_t from;
  Action action;
  std::size_t to;
};

struct CtxClosure {
  std::vector<CtxState> states;      // breadth-first order; 0 is the start
  std::vector<CtxEdge> edges;
  std::vector<std::size_t> parent;   // BFS tree, parent[0] == 0
  std::vector<std::optional<Action>> via;
  std::vector<std::size_t> depth;
  std::vector<bool> terminal;        // no transition at all
  bool exhausted = false;
  bool budget_hit = false;
  bool bang_bound_hit = false;
  bool stopped_early = false;

  // Path of (state, action) pairs from the start to `target`.
  std::vector<std::pair<CtxState, Action>> path_to(std::size_t target) const {
    std::vector<std::pair<CtxState, Action>> out;
    for (std::size_t v = target; v != 0; v = parent[v]) out.emplace_back(states[parent[v]], *via[v]);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

// Breadth-first closure with deduplication on canonical renderings. `stop`
// is consulted once per newly discovered state; returning true ends the
// search with exhausted=false and stopped_early=true.
template <typename Stop>
CtxClosure ctx_reduce_closure(const GammaCtx& g, const CtxState& s0, ClosureOptions opts, Stop stop) {
  CtxClosure c;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> bangs;  // server firings on the BFS path
  auto discover = [&](CtxState s, std::size_t parent, std::optional<Action> via, std::size_t nb) {
    std::size_t id = c.states.size();
    index.emplace(render(s), id);
    c.states.push_back(std::move(s));
    c.parent.push_back(parent);
    c.via.push_back(std::move(via));
    c.depth.push_back(id == 0 ? 0 : c.depth[parent] + 1);
    c.terminal.push_back(false);
    bangs.push_back(nb);
    return id;
  };
  discover(s0, 0, std::nullopt, 0);
  if (stop(c, std::size_t{0})) {
    c.stopped_early = true;
    return c;
  }
  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    std::size_t cur = frontier.front();
    frontier.pop_front();
    auto succ = ctx_transitions(g, c.states[cur]);
    c.terminal[cur] = succ.empty();
    for (auto& t : succ) {
      std::size_t nb = bangs[cur] + (t.replicated ? 1 : 0);
      std::string key = render(t.next);
      auto it = index.find(key);
      std::size_t to;
      if (it != index.end()) {
        to = it->second;
      } else {
        if (nb > opts.bang_bound) {
          c.bang_bound_hit = true;
          continue;
        }
        if (c.states.size() >= opts.max_states) {
          c.budget_hit = true;
          continue;
        }
        to = discover(std::move(t.next), cur, t.action, nb);
        frontier.push_back(to);
        c.edges.push_back({cur, t.action, to});
        if (stop(c, to)) {
          c.stopped_early = true;
          return c;
        }
        continue;
      }
      c.edges.push_back({cur, std::move(t.action), to});
    }
  }
  c.exhausted = !c.budget_hit && !c.bang_bound_hit;
  return c;
}

inline CtxClosure ctx_reduce_closure(const GammaCtx& g, const CtxState& s0, ClosureOptions opts = {}) {
  return ctx_reduce_closure(g, s0, opts, [](const CtxClosure&, std::size_t) { return false; });
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

inline std::string to_dot(const CtxClosure& c) {
  std::ostringstream os;
  os << "digraph lts {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    os << "  s" << i << " [label=\"" << dot_escape(render(c.states[i])) << "\"";
    if (i == 0) os << ", style=bold";
    os << "];\n";
  }
  for (const auto& e : c.edges)
    os << "  s" << e.from << " -> s" << e.to << " [label=\"" << dot_escape(render(e.action)) << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace magpi
