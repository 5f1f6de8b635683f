#pragma once

// Canonical forms up to structural congruence. Parallel compositions are
// flattened into a sorted multiset (ordered by rendered text), rebuilt
// left-associated, and inactive operands are dropped. There are no
// congruence rules for replication.

#include <algorithm>

#include "magpi/render.hpp"
#include "magpi/syntax.hpp"

namespace magpi {

inline void flatten_into(const ProcessTerm& t, std::vector<Thread>& out) {
  std::visit(Overloaded{
                 [&](const ServerProcess& s) { out.emplace_back(s); },
                 [&](const LinearProcess& p) { out.emplace_back(p); },
                 [&](const ParTerm& p) {
                   flatten_into(*p.left, out);
                   flatten_into(*p.right, out);
                 },
             },
             t.node);
}

inline std::vector<Thread> flatten(const ProcessTerm& t) {
  std::vector<Thread> out;
  flatten_into(t, out);
  return out;
}

inline bool is_inact(const Thread& t) {
  auto* p = std::get_if<LinearProcess>(&t);
  return p && std::holds_alternative<Inact>(p->node);
}

// Canonical composition of threads: inactive operands removed, the rest
// sorted and folded to the left. An empty composition is `end`.
inline ProcessTerm compose(std::vector<Thread> threads) {
  std::erase_if(threads, is_inact);
  if (threads.empty()) return lin(inact());
  std::vector<std::pair<std::string, Thread>> keyed;
  keyed.reserve(threads.size());
  for (auto& t : threads) keyed.emplace_back(render(t), std::move(t));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  auto as_term = [](Thread t) {
    return std::visit([](auto x) { return ProcessTerm{std::move(x)}; }, std::move(t));
  };
  ProcessTerm acc = as_term(std::move(keyed.front().second));
  for (std::size_t i = 1; i < keyed.size(); ++i) acc = par(std::move(acc), as_term(std::move(keyed[i].second)));
  return acc;
}

inline ProcessTerm normalize(const ProcessTerm& t) { return compose(flatten(t)); }

// Roles whose term reduces to `end` stay in the map; only the explorer's
// terminal classifier treats them as garbage.
inline Network normalize(const Network& n) {
  Network out;
  out.buffer = n.buffer;
  for (const auto& [role, term] : n.processes) out.processes.emplace(role, normalize(term));
  return out;
}

inline SessionType normalize(const SessionType& s);

inline TypeArm normalize(const TypeArm& a) {
  return TypeArm{a.peer, a.label, a.payload, normalize(*a.cont)};
}

// ParT flattened and sorted; a single component unwraps. End components are
// kept (the multiset keeps its size).
inline SessionType normalize(const SessionType& s) {
  return std::visit(
      Overloaded{
          [](const EndType&) { return end_t(); },
          [](const SelectType& t) {
            SelectType out;
            for (const auto& a : t.arms) out.arms.push_back(normalize(a));
            return SessionType{std::move(out)};
          },
          [](const BranchType& t) {
            BranchType out;
            for (const auto& a : t.arms) out.arms.push_back(normalize(a));
            if (t.timeout) out.timeout = Box<SessionType>(normalize(**t.timeout));
            return SessionType{std::move(out)};
          },
          [](const ParType& t) {
            std::vector<SessionType> flat;
            for (const auto& c : t.components) {
              SessionType n = normalize(c);
              if (auto* inner = std::get_if<ParType>(&n.node)) {
                for (auto& x : inner->components) flat.push_back(std::move(x));
              } else {
                flat.push_back(std::move(n));
              }
            }
            if (flat.size() == 1) return std::move(flat.front());
            std::vector<std::pair<std::string, SessionType>> keyed;
            for (auto& c : flat) keyed.emplace_back(render(c), std::move(c));
            std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            ParType out;
            for (auto& [k, c] : keyed) out.components.push_back(std::move(c));
            return SessionType{std::move(out)};
          },
      },
      s.node);
}

// Components of a (possibly parallel) session type.
inline std::vector<SessionType> components(const SessionType& s) {
  if (auto* p = std::get_if<ParType>(&s.node)) return p->components;
  return {s};
}

}  // namespace magpi
