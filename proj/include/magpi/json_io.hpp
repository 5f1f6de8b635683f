#pragma once

// JSON views of results. Every top-level document carries "schema": 1.

#include <cstdio>

#include <json.hpp>

#include "magpi/context_lts.hpp"
#include "magpi/harness.hpp"
#include "magpi/semantics.hpp"
#include "magpi/typechecker.hpp"
#include "magpi/verifier.hpp"

namespace magpi {

inline constexpr int kJsonSchema = 1;

inline nlohmann::json to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Severity::Error ? "error" : "warning"},
          {"line", d.location.line},
          {"column", d.location.column},
          {"rule", d.rule},
          {"message", d.message}};
}

inline nlohmann::json to_json(const Derivation& d) {
  nlohmann::json premises = nlohmann::json::array();
  for (const auto& p : d.premises) premises.push_back(to_json(p));
  return {{"rule", to_string(d.rule)}, {"judgement", render_judgement(d)}, {"premises", std::move(premises)}};
}

inline nlohmann::json to_json(const NetStep& s) {
  nlohmann::json j{{"rule", to_string(s.rule)}};
  if (s.role) j["role"] = s.role->value;
  if (s.message) j["message"] = render(*s.message);
  if (s.arm) j["arm"] = *s.arm;
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

inline std::string hex_id(NetStateId id) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id.digest));
  return buf;
}

inline nlohmann::json to_json(const TraceEntry& e, std::size_t index) {
  auto j = to_json(e.step);
  j["index"] = index;
  j["pre"] = hex_id(e.pre);
  j["post"] = hex_id(e.post);
  return j;
}

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"status", to_string(v.status)}, {"states", v.states_explored}};
  if (v.condition) j["condition"] = to_string(*v.condition);
  if (v.status == Status::Violated) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& s : v.witness) w.push_back({{"action", render(s.action)}, {"from", render(s.state)}});
    j["witness"] = std::move(w);
  }
  if (!v.detail.empty()) j["detail"] = v.detail;
  if (v.longest_path) j["k"] = *v.longest_path;
  return j;
}

inline nlohmann::json to_json(const NetPropertyResult& r) {
  nlohmann::json j{{"status", to_string(r.status)}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

inline nlohmann::json to_json(const CtxClosure& c) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : c.states) states.push_back(render(s));
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : c.edges) edges.push_back({{"from", e.from}, {"action", render(e.action)}, {"to", e.to}});
  return {{"states", std::move(states)}, {"edges", std::move(edges)}, {"exhausted", c.exhausted}};
}

}  // namespace magpi
