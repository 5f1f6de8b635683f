#pragma once

// Batch front end. `run` is the whole command-line tool minus argument
// parsing, so tests can drive it with string streams.
//
// Exit codes: 0 ok / Holds, 1 Violated or type error, 2 Inconclusive,
// 3 usage or parse error.

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "magpi/json_io.hpp"
#include "magpi/parser.hpp"
#include "magpi/semantics.hpp"
#include "magpi/verifier.hpp"

namespace magpi {

enum ExitCode : int { kExitOk = 0, kExitViolated = 1, kExitInconclusive = 2, kExitUsage = 3 };

struct RunConfig {
  std::string command;  // check | verify | simulate | explore | lts
  std::string input;
  std::optional<std::uint64_t> seed;
  std::size_t budget = kDefaultStateBudget;
  std::size_t bound = kDefaultBangBound;
  DropPolicy policy = DropPolicy::Any;
  std::set<std::string> emit;  // json | derivation | lts-dot | trace
  std::optional<std::string> out;
  std::size_t max_steps = 100;
};

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> c{"check", "verify", "simulate", "explore", "lts"};
  return c;
}
inline const std::set<std::string>& known_emits() {
  static const std::set<std::string> e{"json", "derivation", "lts-dot", "trace"};
  return e;
}

namespace detail {

inline void print_diagnostic(std::ostream& err, const std::string& path, const Diagnostic& d) {
  err << path << ":" << d.location.line << ":" << d.location.column << ": "
      << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message;
  if (!d.rule.empty()) err << " [" << d.rule << "]";
  err << "\n";
}

inline void print_derivation(std::ostream& os, const Derivation& d, int indent = 0) {
  os << std::string(indent * 2, ' ') << to_string(d.rule) << "  " << render_judgement(d) << "\n";
  for (const auto& p : d.premises) print_derivation(os, p, indent + 1);
}

inline int worst(std::initializer_list<Status> ss) {
  int code = kExitOk;
  for (auto s : ss) {
    if (s == Status::Violated) return kExitViolated;
    if (s == Status::Inconclusive) code = kExitInconclusive;
  }
  return code;
}

class Runner {
 public:
  Runner(const RunConfig& cfg, std::ostream& out, std::ostream& err) : cfg_(cfg), out_(out), err_(err) {}

  int run() {
    if (!known_commands().contains(cfg_.command)) {
      err_ << "unknown command '" << cfg_.command << "'\n";
      return kExitUsage;
    }
    for (const auto& e : cfg_.emit)
      if (!known_emits().contains(e)) {
        err_ << "unknown --emit value '" << e << "'\n";
        return kExitUsage;
      }
    if (cfg_.command == "simulate" && !cfg_.seed) {
      err_ << "simulate requires --seed\n";
      return kExitUsage;
    }
    SourceFile src;
    try {
      src = load_source(cfg_.input);
    } catch (const std::exception& e) {
      err_ << e.what() << "\n";
      return kExitUsage;
    }
    auto parsed = parse_source(src);
    for (const auto& d : parsed.diagnostics) print_diagnostic(err_, src.path, d);
    if (!parsed.ok()) return kExitUsage;
    prog_ = std::move(*parsed.program);
    json_ = {{"schema", kJsonSchema}, {"command", cfg_.command}, {"file", cfg_.input}};

    int code = kExitOk;
    if (cfg_.command == "check") code = check();
    else if (cfg_.command == "verify") code = verify_cmd();
    else if (cfg_.command == "simulate") code = simulate_cmd();
    else if (cfg_.command == "explore") code = explore_cmd();
    else code = lts_cmd();

    if (wants("json")) {
      json_["exit"] = code;
      out_ << json_.dump(2) << "\n";
    }
    return code;
  }

 private:
  bool wants(const char* e) const { return cfg_.emit.contains(e); }
  bool text() const { return !wants("json"); }
  ClosureOptions closure_opts() const { return ClosureOptions{cfg_.budget, cfg_.bound}; }

  // Returns false and reports on a type error.
  bool typecheck_program(TypecheckResult& r) {
    r = typecheck(prog_);
    nlohmann::json j{{"ok", r.ok()}};
    if (r.error) {
      print_diagnostic(err_, cfg_.input, *r.error);
      j["error"] = to_json(*r.error);
    }
    if (r.ok() && wants("derivation")) {
      j["derivation"] = to_json(*r.derivation);
      if (text()) print_derivation(out_, *r.derivation);
    }
    json_["typecheck"] = std::move(j);
    if (text()) out_ << "typecheck: " << (r.ok() ? "pass" : "fail") << "\n";
    return r.ok();
  }

  int check() {
    TypecheckResult r;
    return typecheck_program(r) ? kExitOk : kExitViolated;
  }

  void print_verdict(const char* name, const Verdict& v) {
    out_ << name << ": " << to_string(v.status);
    if (v.condition) out_ << " (" << to_string(*v.condition) << ")";
    if (v.longest_path) out_ << " k=" << *v.longest_path;
    out_ << "  [" << v.states_explored << " states]\n";
    if (v.status == Status::Violated) out_ << "  witness: " << render_witness(v.witness) << "\n";
    if (!v.detail.empty()) out_ << "  " << v.detail << "\n";
  }

  int verify_cmd() {
    TypecheckResult typing;
    bool typed = typecheck_program(typing);
    auto ctx = initial_contexts(prog_);
    auto s0 = initial_state(ctx);
    auto opts = closure_opts();
    Verdict safety = check_safety(ctx.gamma, s0, prog_.reliability, opts);
    Verdict df = check_df_types(ctx.gamma, s0, opts);
    Verdict term = check_term_types(ctx.gamma, s0, opts);
    bool tt = check_tt(ctx.gamma);
    TransferSummary transfer;
    if (typed) transfer = report_property_transfer(safety, df, term);

    json_["safety"] = to_json(safety);
    json_["df"] = to_json(df);
    json_["term"] = to_json(term);
    json_["tt"] = tt;
    json_["transfer"] = transfer.claims;
    if (text()) {
      print_verdict("safety", safety);
      print_verdict("df", df);
      print_verdict("term", term);
      out_ << "tt: " << (tt ? "true" : "false") << "\n";
      if (transfer.claims.empty()) out_ << "licensed network properties: none\n";
      for (const auto& c : transfer.claims) out_ << "licensed: " << c << "\n";
    }
    if (!typed) return kExitViolated;
    // termination is reported but does not fail the run
    return worst({safety.status, df.status});
  }

  int simulate_cmd() {
    Trace t = simulate(prog_.network, prog_.reliability, *cfg_.seed, cfg_.max_steps, cfg_.policy);
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      auto j = to_json(t.steps[i], i);
      if (wants("trace")) out_ << j.dump() << "\n";
      else if (text()) out_ << i << ": " << render(t.steps[i].step) << "\n";
      steps.push_back(std::move(j));
    }
    json_["seed"] = *cfg_.seed;
    json_["policy"] = to_string(cfg_.policy);
    json_["trace"] = std::move(steps);
    json_["final"] = render(t.final_network);
    json_["failed"] = t.failed;
    if (text() && !wants("trace")) out_ << "final: " << render(t.final_network) << "\n";
    if (t.failed) {
      err_ << "runtime type error: " << t.failure << "\n";
      return kExitViolated;
    }
    return kExitOk;
  }

  int explore_cmd() {
    auto initial = enumerate_steps(normalize(prog_.network), prog_.reliability);
    auto ex = explore_network(prog_.network, prog_.reliability, StateBudget{cfg_.budget});
    auto df = check_df_network(ex);
    auto term = check_term_network(ex);
    auto fh = check_failure_handling(ex, prog_.reliability);

    nlohmann::json succ = nlohmann::json::array();
    for (const auto& s : initial) succ.push_back(to_json(s.step));
    json_["initial_successors"] = std::move(succ);
    json_["states"] = ex.states.size();
    json_["edges"] = ex.edges.size();
    json_["terminals"] = ex.terminals.size();
    json_["exhausted"] = ex.exhausted;
    json_["runtime_errors"] = ex.errors.size();
    json_["df"] = to_json(df);
    json_["term"] = to_json(term);
    json_["failure_handling"] = to_json(fh);
    if (text()) {
      out_ << "initial successors: " << initial.size() << "\n";
      for (const auto& s : initial) out_ << "  " << render(s.step) << "\n";
      out_ << "states: " << ex.states.size() << "  edges: " << ex.edges.size()
           << "  terminals: " << ex.terminals.size() << (ex.exhausted ? "" : "  (budget exceeded)") << "\n";
      if (!ex.errors.empty()) out_ << "runtime type errors: " << ex.errors.size() << "\n";
      out_ << "df(N): " << to_string(df.status) << "\n";
      out_ << "term(N): " << to_string(term.status) << (term.detail.empty() ? "" : "  " + term.detail) << "\n";
      out_ << "failure handling: " << to_string(fh.status) << (fh.detail.empty() ? "" : "  " + fh.detail) << "\n";
    }
    return worst({df.status, fh.status});
  }

  int lts_cmd() {
    auto ctx = initial_contexts(prog_);
    auto c = ctx_reduce_closure(ctx.gamma, initial_state(ctx), closure_opts());
    json_["lts"] = to_json(c);
    if (text()) {
      if (wants("lts-dot") || cfg_.emit.empty()) out_ << to_dot(c);
      else out_ << "states: " << c.states.size() << "  edges: " << c.edges.size() << "\n";
    }
    return c.exhausted ? kExitOk : kExitInconclusive;
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  Program prog_;
  nlohmann::json json_;
};

}  // namespace detail

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.out) {
    std::ofstream file(*cfg.out, std::ios::binary);
    if (!file) {
      err << "cannot write " << *cfg.out << "\n";
      return kExitUsage;
    }
    return detail::Runner(cfg, file, err).run();
  }
  return detail::Runner(cfg, out, err).run();
}

}  // namespace magpi
