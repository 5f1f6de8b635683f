#pragma once

// Recursive-descent parser for `.magpi` protocol files.
//
//   file    := (reliab | buffer | roledef)+
//   reliab  := "reliable" ( "all" | "none" | "{" pair ("," pair)* "}" )
//   buffer  := "buffer" "{" msg* "}"
//   msg     := IDENT "->" IDENT ":" IDENT "<" literal* ">"
//   roledef := "role" IDENT (":" type)? "=" proc
//   proc    := "end" | "send" IDENT ":" IDENT "<" expr* ">" "." proc
//            | "recv" "{" arm ("," arm)* ("," "timeout" "." proc)? "}"
//            | "server" "{" arm ("," arm)* "}"            (top level only)
//            | "choice" "{" proc ("|" proc)+ "}"
//   type    := "end" | "+{" tarm,* "}" | "&{" tarm,* ("," "timeout" "." type)? "}"
//            | "!{" tarm,* "}"                             (top level only)
//
// Commas between payload items, binders and buffered messages are optional.
// `#` starts a line comment.

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpi/normalize.hpp"
#include "magpi/syntax.hpp"
#include "magpi/wellformed.hpp"

namespace magpi {

struct SourceFile {
  std::string path;
  std::string text;
};

inline SourceFile load_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return SourceFile{path, ss.str()};
}

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value(); }
};

namespace detail {

enum class Tok { Ident, Int, Real, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

struct SyntaxError {
  Diagnostic diag;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                      src_[pos_] == '\''))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        number(t);
      } else if (c == '"') {
        string(t);
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        t.kind = Tok::Punct;
        t.text = "->";
        advance();
        advance();
      } else if (std::string_view("{}()<>,.:|=+&!").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.text = std::string(1, advance());
      } else {
        throw SyntaxError{{Severity::Error, t.loc, std::string("unexpected character '") + c + "'", "lexical"}};
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void number(Token& t) {
    t.kind = Tok::Int;
    if (src_[pos_] == '-') t.text += advance();
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) t.text += advance();
    };
    digits();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      t.kind = Tok::Real;
      t.text += advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      std::string exp(1, src_[pos_]);
      std::size_t k = pos_ + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) exp += src_[k++];
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        t.kind = Tok::Real;
        while (pos_ < k) t.text += advance();
        digits();
      } else {
        pos_ = save;
      }
    }
  }

  void string(Token& t) {
    t.kind = Tok::String;
    SourceLoc start{line_, col_};
    advance();
    for (;;) {
      if (pos_ >= src_.size())
        throw SyntaxError{{Severity::Error, start, "unterminated string literal", "lexical"}};
      char c = advance();
      if (c == '"') return;
      if (c == '\\') {
        if (pos_ >= src_.size()) continue;
        char e = advance();
        t.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        t.text += c;
      }
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  struct RoleDef {
    Role role;
    SourceLoc loc;
    std::optional<SessionType> session;
    std::optional<ReplicatedType> replicated;
    ProcessTerm term;
  };

  struct File {
    std::optional<std::pair<SourceLoc, std::variant<std::monostate, bool, std::vector<std::pair<Role, Role>>>>> reliab;
    std::vector<Message> buffer;
    std::vector<RoleDef> roles;
  };

  File file() {
    File f;
    bool seen_buffer = false;
    while (peek().kind != Tok::End) {
      if (is_word("reliable")) {
        if (f.reliab) fail("duplicate reliability declaration");
        f.reliab = reliability();
      } else if (is_word("buffer")) {
        if (seen_buffer) fail("duplicate buffer declaration");
        seen_buffer = true;
        f.buffer = buffer();
      } else if (is_word("role")) {
        f.roles.push_back(roledef());
      } else {
        fail("expected 'role', 'reliable' or 'buffer'");
      }
    }
    if (f.roles.empty()) fail("a file declares at least one role");
    return f;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_punct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }

  [[noreturn]] void fail(const std::string& msg, const char* rule = "syntax") const {
    std::string found = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
    throw SyntaxError{{Severity::Error, peek().loc, msg + " (found " + found + ")", rule}};
  }

  void expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    next();
  }
  void expect_word(const char* w) {
    if (!is_word(w)) fail(std::string("expected '") + w + "'");
    next();
  }
  std::string ident(const char* what = "identifier") {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  void optional_comma() {
    if (is_punct(",")) next();
  }

  std::pair<SourceLoc, std::variant<std::monostate, bool, std::vector<std::pair<Role, Role>>>> reliability() {
    SourceLoc loc = peek().loc;
    expect_word("reliable");
    if (is_word("all")) {
      next();
      return {loc, true};
    }
    if (is_word("none")) {
      next();
      return {loc, false};
    }
    std::vector<std::pair<Role, Role>> pairs;
    expect("{");
    do {
      expect("{");
      Role a{ident("role")};
      expect(",");
      Role b{ident("role")};
      expect("}");
      pairs.emplace_back(a, b);
    } while (is_punct(",") && (next(), true));
    expect("}");
    return {loc, pairs};
  }

  std::optional<Literal> literal() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
        next();
        try {
          return Literal{static_cast<std::int64_t>(std::stoll(t.text))};
        } catch (const std::out_of_range&) {
          fail("integer literal out of range");
        }
      case Tok::Real: next(); return Literal{std::stod(t.text)};
      case Tok::String: next(); return Literal{t.text};
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          next();
          return Literal{t.text == "true"};
        }
        return std::nullopt;
      default: return std::nullopt;
    }
  }

  std::vector<Message> buffer() {
    expect_word("buffer");
    expect("{");
    std::vector<Message> msgs;
    while (!is_punct("}")) {
      Message m;
      m.src = Role{ident("source role")};
      expect("->");
      m.dst = Role{ident("destination role")};
      expect(":");
      m.label = Label{ident("label")};
      expect("<");
      while (!is_punct(">")) {
        auto v = literal();
        if (!v) fail("expected a literal in a buffered message");
        m.payload.push_back(std::move(*v));
        optional_comma();
      }
      next();
      msgs.push_back(std::move(m));
      optional_comma();
    }
    next();
    return msgs;
  }

  RoleDef roledef() {
    expect_word("role");
    RoleDef d;
    d.loc = peek().loc;
    d.role = Role{ident("role name")};
    if (is_punct(":")) {
      next();
      if (is_punct("!")) d.replicated = replicated_type();
      else d.session = session_type();
    }
    expect("=");
    d.term = top_process();
    return d;
  }

  std::vector<BaseType> base_types() {
    expect("(");
    std::vector<BaseType> out;
    while (!is_punct(")")) {
      std::string w = ident("basic type");
      if (w == "Int") out.push_back(BaseType::Int);
      else if (w == "Real") out.push_back(BaseType::Real);
      else if (w == "String") out.push_back(BaseType::String);
      else if (w == "Bool") out.push_back(BaseType::Bool);
      else fail("unknown basic type '" + w + "'");
      optional_comma();
    }
    next();
    return out;
  }

  TypeArm type_arm() {
    TypeArm a;
    a.peer = Role{ident("role")};
    expect(":");
    a.label = Label{ident("label")};
    a.payload = base_types();
    expect(".");
    a.cont = session_type();
    return a;
  }

  ReplicatedType replicated_type() {
    expect("!");
    expect("{");
    ReplicatedType r;
    while (!is_punct("}")) {
      r.arms.push_back(type_arm());
      if (!is_punct("}")) expect(",");
    }
    next();
    return r;
  }

  SessionType session_type() {
    if (is_word("end")) {
      next();
      return end_t();
    }
    if (is_punct("!")) fail("replicated types only occur at the top of a role's type", rules::kNestedReplication);
    if (is_punct("(")) {
      next();
      ParType p;
      p.components.push_back(session_type());
      while (is_punct("|")) {
        next();
        p.components.push_back(session_type());
      }
      expect(")");
      return SessionType{std::move(p)};
    }
    bool select = is_punct("+");
    if (!select && !is_punct("&")) fail("expected a session type");
    next();
    expect("{");
    std::vector<TypeArm> arms;
    std::optional<SessionType> timeout;
    while (!is_punct("}")) {
      if (!select && is_word("timeout")) {
        next();
        expect(".");
        timeout = session_type();
        if (!is_punct("}")) fail("the timeout branch must come last");
        break;
      }
      arms.push_back(type_arm());
      if (!is_punct("}")) expect(",");
    }
    next();
    if (select) return select_t(std::move(arms));
    return branch_t(std::move(arms), std::move(timeout));
  }

  std::vector<Expr> exprs(const char* close) {
    std::vector<Expr> out;
    while (!is_punct(close)) {
      out.push_back(expr());
      optional_comma();
    }
    next();
    return out;
  }

  Expr expr() {
    if (auto v = literal()) return lit(std::move(*v));
    std::string name = ident("expression");
    if (is_punct("(")) {
      next();
      return call(name, exprs(")"));
    }
    return var(name);
  }

  RecvArm recv_arm() {
    RecvArm a;
    a.peer = Role{ident("role")};
    expect(":");
    a.label = Label{ident("label")};
    expect("(");
    while (!is_punct(")")) {
      a.binders.push_back(ident("binder"));
      optional_comma();
    }
    next();
    expect(".");
    a.cont = process();
    return a;
  }

  ProcessTerm top_process() {
    if (is_word("server")) {
      next();
      expect("{");
      ServerProcess s;
      while (!is_punct("}")) {
        s.arms.push_back(recv_arm());
        if (!is_punct("}")) expect(",");
      }
      next();
      return ProcessTerm{std::move(s)};
    }
    if (is_word("par")) {
      next();
      expect("{");
      ProcessTerm acc = top_process();
      while (is_punct("|")) {
        next();
        acc = par(std::move(acc), top_process());
      }
      expect("}");
      return acc;
    }
    return lin(process());
  }

  LinearProcess process() {
    if (is_word("end")) {
      next();
      return inact();
    }
    if (is_word("server")) fail("replicated receives only occur at the top of a role's process", rules::kNestedReplication);
    if (is_word("send")) {
      next();
      Send s;
      s.peer = Role{ident("role")};
      expect(":");
      s.label = Label{ident("label")};
      if (is_punct("<")) {
        next();
        s.payload = exprs(">");
      } else {
        expect("(");
        s.payload = exprs(")");
      }
      expect(".");
      s.cont = process();
      return LinearProcess{std::move(s)};
    }
    if (is_word("recv")) {
      next();
      expect("{");
      Branch b;
      while (!is_punct("}")) {
        if (is_word("timeout")) {
          next();
          expect(".");
          b.timeout = Box<LinearProcess>(process());
          if (!is_punct("}")) fail("the timeout branch must come last");
          break;
        }
        b.arms.push_back(recv_arm());
        if (!is_punct("}")) expect(",");
      }
      next();
      return LinearProcess{std::move(b)};
    }
    if (is_word("choice")) {
      next();
      expect("{");
      Choice c;
      c.arms.push_back(process());
      if (!is_punct("|")) fail("a choice needs at least two alternatives");
      while (is_punct("|")) {
        next();
        c.arms.push_back(process());
      }
      expect("}");
      return LinearProcess{std::move(c)};
    }
    fail("expected a process");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses, canonicalizes and checks a protocol file. On any error the program
// is absent and the diagnostics say why; warnings accompany a success.
inline ParseResult parse_source(const SourceFile& src) {
  ParseResult result;
  detail::Parser::File file;
  try {
    detail::Lexer lexer(src.text);
    detail::Parser parser(lexer.run());
    file = parser.file();
  } catch (const detail::SyntaxError& e) {
    result.diagnostics.push_back(e.diag);
    return result;
  }

  Program prog;
  std::vector<Role> roles;
  for (auto& d : file.roles) {
    if (prog.network.processes.contains(d.role)) {
      result.diagnostics.push_back({Severity::Error, d.loc, "role " + d.role.value + " is declared twice", "duplicate-role"});
      continue;
    }
    roles.push_back(d.role);
    prog.role_locations[d.role] = d.loc;
    prog.network.processes.emplace(d.role, std::move(d.term));
    if (d.replicated) prog.gamma.emplace(d.role, std::move(*d.replicated));
    if (d.session) prog.delta.emplace(d.role, std::move(*d.session));
  }
  if (file.reliab) {
    auto& [loc, spec] = *file.reliab;
    if (auto* all = std::get_if<bool>(&spec)) {
      if (*all) prog.reliability = ReliabilityRelation::all(roles);
    } else if (auto* pairs = std::get_if<std::vector<std::pair<Role, Role>>>(&spec)) {
      for (const auto& [a, b] : *pairs) {
        if (a == b) {
          result.diagnostics.push_back(
              {Severity::Error, loc, "role " + a.value + ": a role cannot be reliable with itself", rules::kIrreflexive});
          continue;
        }
        prog.reliability.add(a, b);
      }
    }
  }
  for (auto& m : file.buffer) prog.network.buffer.add(std::move(m));

  auto wf = check_well_formed(prog);
  result.diagnostics.insert(result.diagnostics.end(), wf.begin(), wf.end());
  if (has_errors(result.diagnostics)) return result;

  prog.network = normalize(prog.network);
  for (auto& [role, t] : prog.delta) t = normalize(t);
  result.program = std::move(prog);
  return result;
}

inline ParseResult parse_source(const std::string& text) { return parse_source(SourceFile{"<string>", text}); }

}  // namespace magpi
