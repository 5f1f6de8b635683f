#pragma once

// Abstract syntax for networks, processes, buffers, reliability and types.
//
// Every node is a regular value type. Structural equality is `==`; ordering
// for canonical forms goes through the rendered serialization (render.hpp).

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "magpi/util.hpp"

namespace magpi {

using Role = Name<struct RoleTag>;
using Label = Name<struct LabelTag>;

enum class BaseType { Int, Real, String, Bool };

inline const char* to_string(BaseType b) {
  switch (b) {
    case BaseType::Int: return "Int";
    case BaseType::Real: return "Real";
    case BaseType::String: return "String";
    case BaseType::Bool: return "Bool";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Values and payload expressions

using Literal = std::variant<std::int64_t, double, std::string, bool>;

inline BaseType literal_type(const Literal& v) {
  switch (v.index()) {
    case 0: return BaseType::Int;
    case 1: return BaseType::Real;
    case 2: return BaseType::String;
    default: return BaseType::Bool;
  }
}

inline std::weak_ordering compare_literal(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return a.index() <=> b.index();
  return std::visit(
      Overloaded{
          [&](std::int64_t x) { return std::weak_ordering(x <=> std::get<std::int64_t>(b)); },
          [&](double x) -> std::weak_ordering {
            double y = std::get<double>(b);
            if (x < y) return std::weak_ordering::less;
            if (y < x) return std::weak_ordering::greater;
            return std::weak_ordering::equivalent;
          },
          [&](const std::string& x) { return std::weak_ordering(x <=> std::get<std::string>(b)); },
          [&](bool x) { return std::weak_ordering(x <=> std::get<bool>(b)); },
      },
      a);
}

struct VarRef {
  std::string name;
  bool operator==(const VarRef&) const = default;
};

struct Expr;

// Application of a declared external function (see builtins below).
struct Call {
  std::string fn;
  std::vector<Expr> args;
  bool operator==(const Call&) const = default;
};

struct Expr {
  std::variant<Literal, VarRef, Call> node;
  bool operator==(const Expr&) const = default;
};

inline Expr lit(Literal v) { return Expr{std::move(v)}; }
inline Expr var(std::string name) { return Expr{VarRef{std::move(name)}}; }
inline Expr call(std::string fn, std::vector<Expr> args) { return Expr{Call{std::move(fn), std::move(args)}}; }

// External functions available to payload expressions. Total over their
// declared domain, deterministic.
struct Builtin {
  std::string name;
  std::vector<BaseType> params;
  BaseType result;
  Literal (*apply)(const std::vector<Literal>&);
};

inline const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> table = {
      {"f", {BaseType::Int}, BaseType::Real,
       [](const std::vector<Literal>& a) -> Literal { return static_cast<double>(std::get<std::int64_t>(a[0])); }},
  };
  return table;
}

inline const Builtin* find_builtin(const std::string& name) {
  for (const auto& b : builtins())
    if (b.name == name) return &b;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Processes

struct LinearProcess;

struct RecvArm {
  Role peer;
  Label label;
  std::vector<std::string> binders;
  Box<LinearProcess> cont;
  bool operator==(const RecvArm&) const = default;
};

struct Inact {
  bool operator==(const Inact&) const = default;
};

struct Send {
  Role peer;
  Label label;
  std::vector<Expr> payload;
  Box<LinearProcess> cont;
  bool operator==(const Send&) const = default;
};

struct Branch {
  std::vector<RecvArm> arms;
  std::optional<Box<LinearProcess>> timeout;
  bool operator==(const Branch&) const = default;
};

// Internal nondeterministic choice; stands in for conditionals.
struct Choice {
  std::vector<LinearProcess> arms;
  bool operator==(const Choice&) const = default;
};

struct LinearProcess {
  std::variant<Inact, Send, Branch, Choice> node;
  bool operator==(const LinearProcess&) const = default;
};

// Replicated receive. Only ever occurs at the top of a role's term.
struct ServerProcess {
  std::vector<RecvArm> arms;
  bool operator==(const ServerProcess&) const = default;
};

struct ProcessTerm;

// Runtime parallel composition of a role's threads.
struct ParTerm {
  Box<ProcessTerm> left;
  Box<ProcessTerm> right;
  bool operator==(const ParTerm&) const = default;
};

struct ProcessTerm {
  std::variant<ServerProcess, ParTerm, LinearProcess> node;
  bool operator==(const ProcessTerm&) const = default;
};

// One operand of a flattened parallel composition.
using Thread = std::variant<ServerProcess, LinearProcess>;

inline LinearProcess inact() { return LinearProcess{Inact{}}; }
inline LinearProcess send(std::string peer, std::string label, std::vector<Expr> payload, LinearProcess cont) {
  return LinearProcess{Send{Role{std::move(peer)}, Label{std::move(label)}, std::move(payload), std::move(cont)}};
}
inline RecvArm arm(std::string peer, std::string label, std::vector<std::string> binders, LinearProcess cont) {
  return RecvArm{Role{std::move(peer)}, Label{std::move(label)}, std::move(binders), std::move(cont)};
}
inline LinearProcess recv(std::vector<RecvArm> arms, std::optional<LinearProcess> timeout = std::nullopt) {
  Branch b{std::move(arms), std::nullopt};
  if (timeout) b.timeout = Box<LinearProcess>(std::move(*timeout));
  return LinearProcess{std::move(b)};
}
inline LinearProcess choice(std::vector<LinearProcess> arms) { return LinearProcess{Choice{std::move(arms)}}; }
inline ProcessTerm lin(LinearProcess p) { return ProcessTerm{std::move(p)}; }
inline ProcessTerm server(std::vector<RecvArm> arms) { return ProcessTerm{ServerProcess{std::move(arms)}}; }
inline ProcessTerm par(ProcessTerm l, ProcessTerm r) { return ProcessTerm{ParTerm{std::move(l), std::move(r)}}; }

// ---------------------------------------------------------------------------
// Messages, buffers, networks, reliability

struct Message {
  Role src;
  Role dst;
  Label label;
  std::vector<Literal> payload;

  bool operator==(const Message& o) const {
    return (*this <=> o) == std::weak_ordering::equivalent;
  }
  std::weak_ordering operator<=>(const Message& o) const {
    if (auto c = std::tie(src, dst, label) <=> std::tie(o.src, o.dst, o.label); c != 0) return c;
    auto n = std::min(payload.size(), o.payload.size());
    for (std::size_t i = 0; i < n; ++i)
      if (auto c = compare_literal(payload[i], o.payload[i]); c != 0) return c;
    return payload.size() <=> o.payload.size();
  }
};

// Bag of in-transit messages. Kept sorted so that equality is multiset
// equality regardless of insertion order.
class Buffer {
 public:
  Buffer() = default;
  Buffer(std::initializer_list<Message> msgs) {
    for (const auto& m : msgs) add(m);
  }

  void add(Message m) {
    auto it = std::upper_bound(msgs_.begin(), msgs_.end(), m);
    msgs_.insert(it, std::move(m));
  }
  bool remove_one(const Message& m) {
    auto it = std::lower_bound(msgs_.begin(), msgs_.end(), m);
    if (it == msgs_.end() || !(*it == m)) return false;
    msgs_.erase(it);
    return true;
  }
  const std::vector<Message>& contents() const { return msgs_; }
  bool empty() const { return msgs_.empty(); }
  std::size_t size() const { return msgs_.size(); }

  bool operator==(const Buffer&) const = default;

 private:
  std::vector<Message> msgs_;
};

struct Network {
  std::map<Role, ProcessTerm> processes;
  Buffer buffer;
  bool operator==(const Network&) const = default;
};

// Unordered pairs of roles whose communication can never fail.
class ReliabilityRelation {
 public:
  ReliabilityRelation() = default;
  ReliabilityRelation(std::initializer_list<std::pair<std::string, std::string>> pairs) {
    for (const auto& [a, b] : pairs) add(Role{a}, Role{b});
  }

  static ReliabilityRelation all(const std::vector<Role>& roles) {
    ReliabilityRelation r;
    for (std::size_t i = 0; i < roles.size(); ++i)
      for (std::size_t j = i + 1; j < roles.size(); ++j) r.add(roles[i], roles[j]);
    return r;
  }

  // Reflexive pairs are stored as given so that well-formedness can report them.
  void add(const Role& a, const Role& b) { pairs_.insert(a < b ? std::pair{a, b} : std::pair{b, a}); }
  bool reliable(const Role& a, const Role& b) const {
    return pairs_.contains(a < b ? std::pair{a, b} : std::pair{b, a});
  }
  const std::set<std::pair<Role, Role>>& pairs() const { return pairs_; }
  bool empty() const { return pairs_.empty(); }
  bool operator==(const ReliabilityRelation&) const = default;

 private:
  std::set<std::pair<Role, Role>> pairs_;
};

// ---------------------------------------------------------------------------
// Types

struct SessionType;

struct TypeArm {
  Role peer;
  Label label;
  std::vector<BaseType> payload;
  Box<SessionType> cont;
  bool operator==(const TypeArm&) const = default;
};

struct EndType {
  bool operator==(const EndType&) const = default;
};
struct SelectType {
  std::vector<TypeArm> arms;
  bool operator==(const SelectType&) const = default;
};
struct BranchType {
  std::vector<TypeArm> arms;
  std::optional<Box<SessionType>> timeout;
  bool operator==(const BranchType&) const = default;
};
// Runtime-only parallel session types; a flattened multiset.
struct ParType {
  std::vector<SessionType> components;
  bool operator==(const ParType&) const = default;
};

struct SessionType {
  std::variant<EndType, SelectType, BranchType, ParType> node;
  bool operator==(const SessionType&) const = default;

  bool is_end() const { return std::holds_alternative<EndType>(node); }
};

struct ReplicatedType {
  std::vector<TypeArm> arms;
  bool operator==(const ReplicatedType&) const = default;
};

struct MessageType {
  Role src;
  Role dst;
  Label label;
  std::vector<BaseType> payload;
  auto operator<=>(const MessageType&) const = default;
};

inline SessionType end_t() { return SessionType{EndType{}}; }
inline TypeArm tarm(std::string peer, std::string label, std::vector<BaseType> payload, SessionType cont) {
  return TypeArm{Role{std::move(peer)}, Label{std::move(label)}, std::move(payload), std::move(cont)};
}
inline SessionType select_t(std::vector<TypeArm> arms) { return SessionType{SelectType{std::move(arms)}}; }
inline SessionType branch_t(std::vector<TypeArm> arms, std::optional<SessionType> timeout = std::nullopt) {
  BranchType b{std::move(arms), std::nullopt};
  if (timeout) b.timeout = Box<SessionType>(std::move(*timeout));
  return SessionType{std::move(b)};
}
inline ReplicatedType replicated_t(std::vector<TypeArm> arms) { return ReplicatedType{std::move(arms)}; }

// Node count used to compare type sizes: one per End, Select, Branch, Par
// or Replicated node, one per arm and one per timeout.
inline std::size_t type_size(const SessionType& s);

inline std::size_t type_size(const std::vector<TypeArm>& arms) {
  std::size_t n = 0;
  for (const auto& a : arms) n += 1 + type_size(*a.cont);
  return n;
}

inline std::size_t type_size(const SessionType& s) {
  return 1 + std::visit(Overloaded{
                            [](const EndType&) -> std::size_t { return 0; },
                            [](const SelectType& t) { return type_size(t.arms); },
                            [](const BranchType& t) {
                              return type_size(t.arms) + (t.timeout ? 1 + type_size(**t.timeout) : 0);
                            },
                            [](const ParType& t) {
                              std::size_t n = 0;
                              for (const auto& c : t.components) n += type_size(c);
                              return n;
                            },
                        },
                        s.node);
}

inline std::size_t type_size(const ReplicatedType& r) { return 1 + type_size(r.arms); }

inline MessageType type_of(const Message& m) {
  MessageType t{m.src, m.dst, m.label, {}};
  for (const auto& v : m.payload) t.payload.push_back(literal_type(v));
  return t;
}

// ---------------------------------------------------------------------------
// Source bookkeeping

struct SourceLoc {
  int line = 1;
  int column = 1;
  bool operator==(const SourceLoc&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLoc location;
  std::string message;
  std::string rule;
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

// A complete protocol description: the network, its type assignment and
// the reliability relation it runs under.
struct Program {
  Network network;
  std::map<Role, ReplicatedType> gamma;
  std::map<Role, SessionType> delta;
  ReliabilityRelation reliability;
  std::map<Role, SourceLoc> role_locations;

  bool operator==(const Program& o) const {
    return network == o.network && gamma == o.gamma && delta == o.delta && reliability == o.reliability;
  }
};

}  // namespace magpi
