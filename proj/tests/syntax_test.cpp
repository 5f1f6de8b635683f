#include <gtest/gtest.h>

#include "corpus.hpp"
#include "magpi/magpi.hpp"

using namespace magpi;

namespace {

Program parse_ok(const std::string& text) {
  auto r = parse_source(text);
  EXPECT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : r.diagnostics.front().message);
  return r.ok() ? *r.program : Program{};
}

bool has_rule(const ParseResult& r, const std::string& rule) {
  for (const auto& d : r.diagnostics)
    if (d.rule == rule) return true;
  return false;
}

}  // namespace

TEST(Parser, ReadsTypesProcessesAndBuffer) {
  auto p = parse_ok(R"(
    reliable none
    buffer { p->q:m<"Life is"> }
    role p : +{q:m(Int).end} = send q:m<42>.end
    role q : &{p:m(String).end, timeout.end} = recv{p:m(x).end, timeout.end}
  )");
  ASSERT_EQ(p.network.processes.size(), 2u);
  EXPECT_TRUE(p.reliability.empty());
  ASSERT_EQ(p.network.buffer.size(), 1u);
  const auto& m = p.network.buffer.contents().front();
  EXPECT_EQ(render(m), "p->q:m<\"Life is\">");
  EXPECT_EQ(render(p.delta.at(Role{"p"})), "+{q:m(Int).end}");
  EXPECT_EQ(render(p.delta.at(Role{"q"})), "&{p:m(String).end, timeout.end}");
  EXPECT_EQ(render(p.network.processes.at(Role{"q"})), "recv{p:m(x).end, timeout.end}");
}

TEST(Parser, ReliabilityForms) {
  auto all = parse_ok("reliable all\nrole a : end = end\nrole b : end = end\nrole c : end = end");
  EXPECT_TRUE(all.reliability.reliable(Role{"a"}, Role{"c"}));
  EXPECT_EQ(all.reliability.pairs().size(), 3u);
  auto some = parse_ok("reliable {{a, b}}\nrole a : end = end\nrole b : end = end\nrole c : end = end");
  EXPECT_TRUE(some.reliability.reliable(Role{"b"}, Role{"a"}));
  EXPECT_FALSE(some.reliability.reliable(Role{"a"}, Role{"c"}));
}

TEST(Parser, ServerTypesGoToGamma) {
  auto p = parse_ok("role s : !{c:ping().+{c:pong().end}} = server{c:ping().send c:pong<>.end}\n"
                    "role c : +{s:ping().&{s:pong().end}} = send s:ping<>.recv{s:pong().end}");
  EXPECT_TRUE(p.gamma.contains(Role{"s"}));
  EXPECT_FALSE(p.delta.contains(Role{"s"}));
  EXPECT_EQ(render(p.gamma.at(Role{"s"})), "!{c:ping().+{c:pong().end}}");
}

TEST(Parser, SyntaxErrorHasLocation) {
  auto r = parse_source("role p : end =\n  send q:m<42.end");
  ASSERT_FALSE(r.ok());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics.front().location.line, 2);
}

TEST(Parser, RejectsDuplicateRole) {
  auto r = parse_source("role p : end = end\nrole p : end = end");
  EXPECT_FALSE(r.ok());
}

TEST(WellFormed, EmptyBranchRejected) {
  auto r = parse_source("role p : &{} = recv{}");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, rules::kNonemptyBranch));
}

TEST(WellFormed, DuplicateCouplesRejected) {
  auto r = parse_source("role p : &{q:m().end, q:m(Int).end} = recv{q:m().end, q:m(x).end}");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, rules::kDistinctCouples));
}

TEST(WellFormed, LabelPoolFreshness) {
  auto r = parse_source("role s : !{c:req().&{c:req().end}} = server{c:req().recv{c:req().end}}");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, rules::kLabelPool));
  // sending the pool label onwards is fine
  EXPECT_TRUE(parse_source("role s : !{c:req().+{w:req().end}} = server{c:req().send w:req<>.end}").ok());
}

TEST(WellFormed, IrreflexiveReliability) {
  auto r = parse_source("reliable {{p, p}}\nrole p : end = end");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, rules::kIrreflexive));
}

TEST(WellFormed, UnboundVariable) {
  auto r = parse_source("role p : +{q:m(Int).end} = send q:m<y>.end");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, rules::kUnboundVariable));
}

TEST(WellFormed, SourceParallelIsRuntimeOnly) {
  auto r = parse_source("role p = par{end | end}");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, rules::kRuntimePar));
}

TEST(Render, ProgramRoundTripsThroughParser) {
  for (const auto& e : corpus::entries()) {
    auto p = corpus::load(e["file"]);
    auto again = parse_source(render(p));
    ASSERT_TRUE(again.ok()) << e["file"] << ": " << again.diagnostics.front().message << "\n" << render(p);
    EXPECT_EQ(*again.program, p) << e["file"];
  }
}

TEST(Normalize, FlattensDropsInactAndSorts) {
  ProcessTerm t = par(par(lin(inact()), lin(send("q", "b", {}, inact()))), lin(send("q", "a", {}, inact())));
  ProcessTerm n = normalize(t);
  auto threads = flatten(n);
  ASSERT_EQ(threads.size(), 2u);
  EXPECT_EQ(render(threads[0]), "send q:a<>.end");
  EXPECT_EQ(render(threads[1]), "send q:b<>.end");
  EXPECT_EQ(normalize(n), n);
}

TEST(Normalize, AllInactRoleStays) {
  Network n;
  n.processes.emplace(Role{"p"}, par(lin(inact()), lin(inact())));
  auto m = normalize(n);
  ASSERT_TRUE(m.processes.contains(Role{"p"}));
  EXPECT_EQ(render(m.processes.at(Role{"p"})), "end");
}

TEST(Normalize, ParallelTypesKeepEndComponents) {
  SessionType s{ParType{{end_t(), SessionType{ParType{{select_t({tarm("q", "m", {}, end_t())}), end_t()}}}}}};
  auto n = normalize(s);
  ASSERT_TRUE(std::holds_alternative<ParType>(n.node));
  EXPECT_EQ(std::get<ParType>(n.node).components.size(), 3u);
  EXPECT_EQ(normalize(n), n);
}

TEST(Buffer, IsABag) {
  Message a{Role{"p"}, Role{"q"}, Label{"m"}, {std::int64_t{1}}};
  Message b{Role{"p"}, Role{"q"}, Label{"m"}, {std::string("x")}};
  Buffer x{a, b, a};
  Buffer y{b, a, a};
  EXPECT_EQ(x, y);
  EXPECT_TRUE(x.remove_one(a));
  EXPECT_NE(x, y);
  EXPECT_EQ(x.size(), 2u);
}

TEST(TypeSize, ServerVariants) {
  auto rep = corpus::load("ping_replicated_server.magpi");
  auto lin1 = corpus::load("ping_linear_server.magpi");
  auto lin2 = corpus::load("ping_linear_server_retry.magpi");
  EXPECT_EQ(type_size(rep.gamma.at(Role{"q"})), 5u);
  EXPECT_EQ(type_size(lin1.delta.at(Role{"q"})), 19u);
  EXPECT_EQ(type_size(lin2.delta.at(Role{"q"})), 43u);
}
