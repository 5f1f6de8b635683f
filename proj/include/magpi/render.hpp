#pragma once

// Concrete-syntax printing. The output re-parses (see parser.hpp) and doubles
// as the stable structural serialization used for canonical ordering and
// state hashing, so it must stay deterministic.

#include <charconv>
#include <sstream>
#include <string>

#include "magpi/syntax.hpp"

namespace magpi {

namespace detail {

inline std::string render_real(double d) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";  // keep it lexing as a real
  return s;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, const char* sep, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += f(xs[i]);
  }
  return out;
}

}  // namespace detail

inline std::string render(const Literal& v) {
  return std::visit(Overloaded{
                        [](std::int64_t x) { return std::to_string(x); },
                        [](double x) { return detail::render_real(x); },
                        [](const std::string& x) { return detail::quote(x); },
                        [](bool x) { return std::string(x ? "true" : "false"); },
                    },
                    v);
}

inline std::string render(const Expr& e) {
  return std::visit(Overloaded{
                        [](const Literal& v) { return render(v); },
                        [](const VarRef& x) { return x.name; },
                        [](const Call& c) {
                          return c.fn + "(" + detail::join(c.args, ", ", [](const Expr& a) { return render(a); }) + ")";
                        },
                    },
                    e.node);
}

inline std::string render(const LinearProcess& p);

inline std::string render(const RecvArm& a) {
  return a.peer.value + ":" + a.label.value + "(" +
         detail::join(a.binders, ", ", [](const std::string& b) { return b; }) + ")." + render(*a.cont);
}

inline std::string render(const LinearProcess& p) {
  return std::visit(
      Overloaded{
          [](const Inact&) { return std::string("end"); },
          [](const Send& s) {
            return "send " + s.peer.value + ":" + s.label.value + "<" +
                   detail::join(s.payload, ", ", [](const Expr& e) { return render(e); }) + ">." + render(*s.cont);
          },
          [](const Branch& b) {
            std::string out = "recv{" + detail::join(b.arms, ", ", [](const RecvArm& a) { return render(a); });
            if (b.timeout) out += ", timeout." + render(**b.timeout);
            return out + "}";
          },
          [](const Choice& c) {
            return "choice{" + detail::join(c.arms, " | ", [](const LinearProcess& a) { return render(a); }) + "}";
          },
      },
      p.node);
}

inline std::string render(const ServerProcess& s) {
  return "server{" + detail::join(s.arms, ", ", [](const RecvArm& a) { return render(a); }) + "}";
}

inline std::string render(const Thread& t) {
  return std::visit([](const auto& x) { return render(x); }, t);
}

inline std::string render(const ProcessTerm& t);

namespace detail {
inline void collect_par(const ProcessTerm& t, std::vector<std::string>& out) {
  if (auto* p = std::get_if<ParTerm>(&t.node)) {
    collect_par(*p->left, out);
    collect_par(*p->right, out);
  } else {
    out.push_back(render(t));
  }
}
}  // namespace detail

// Par chains print flat: `par{A | B | C}`. Rendering does not normalize;
// a nested, unsorted chain prints in its own operand order.
inline std::string render(const ProcessTerm& t) {
  return std::visit(Overloaded{
                        [](const ServerProcess& s) { return render(s); },
                        [](const LinearProcess& p) { return render(p); },
                        [&](const ParTerm&) {
                          std::vector<std::string> parts;
                          detail::collect_par(t, parts);
                          return "par{" + detail::join(parts, " | ", [](const std::string& s) { return s; }) + "}";
                        },
                    },
                    t.node);
}

inline std::string render_payload_types(const std::vector<BaseType>& ts) {
  return "(" + detail::join(ts, ", ", [](BaseType b) { return std::string(to_string(b)); }) + ")";
}

inline std::string render(const SessionType& s);

inline std::string render(const TypeArm& a) {
  return a.peer.value + ":" + a.label.value + render_payload_types(a.payload) + "." + render(*a.cont);
}

inline std::string render(const SessionType& s) {
  return std::visit(
      Overloaded{
          [](const EndType&) { return std::string("end"); },
          [](const SelectType& t) {
            return "+{" + detail::join(t.arms, ", ", [](const TypeArm& a) { return render(a); }) + "}";
          },
          [](const BranchType& t) {
            std::string out = "&{" + detail::join(t.arms, ", ", [](const TypeArm& a) { return render(a); });
            if (t.timeout) out += ", timeout." + render(**t.timeout);
            return out + "}";
          },
          [](const ParType& t) {
            return "(" + detail::join(t.components, " | ", [](const SessionType& c) { return render(c); }) + ")";
          },
      },
      s.node);
}

inline std::string render(const ReplicatedType& r) {
  return "!{" + detail::join(r.arms, ", ", [](const TypeArm& a) { return render(a); }) + "}";
}

inline std::string render(const MessageType& m) {
  return m.src.value + "->" + m.dst.value + ":" + m.label.value + render_payload_types(m.payload);
}

inline std::string render(const Message& m) {
  return m.src.value + "->" + m.dst.value + ":" + m.label.value + "<" +
         detail::join(m.payload, ", ", [](const Literal& v) { return render(v); }) + ">";
}

inline std::string render(const Buffer& b) {
  return "{" + detail::join(b.contents(), ", ", [](const Message& m) { return render(m); }) + "}";
}

// Single-line serialization of a runtime network; the state key.
inline std::string render(const Network& n) {
  std::string out;
  for (const auto& [role, term] : n.processes) out += role.value + " = " + render(term) + "; ";
  return out + "buffer " + render(n.buffer);
}

inline std::string render(const ReliabilityRelation& r) {
  if (r.empty()) return "reliable none";
  std::string out = "reliable {";
  bool first = true;
  for (const auto& [a, b] : r.pairs()) {
    if (!first) out += ", ";
    first = false;
    out += "{" + a.value + ", " + b.value + "}";
  }
  return out + "}";
}

// Full `.magpi` source for a program. Roles print in key order.
inline std::string render(const Program& p) {
  std::ostringstream os;
  os << render(p.reliability) << "\n";
  if (!p.network.buffer.empty()) {
    os << "buffer {";
    for (const auto& m : p.network.buffer.contents()) os << " " << render(m);
    os << " }\n";
  }
  for (const auto& [role, term] : p.network.processes) {
    os << "role " << role.value;
    if (auto g = p.gamma.find(role); g != p.gamma.end()) os << " : " << render(g->second);
    else if (auto d = p.delta.find(role); d != p.delta.end()) os << " : " << render(d->second);
    os << "\n  = " << render(term) << "\n";
  }
  return os.str();
}

}  // namespace magpi
