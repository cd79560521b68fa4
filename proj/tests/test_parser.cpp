#include "doctest.h"

#include "bioamb/parser.hpp"
#include "bioamb/typing.hpp"
#include "gen.hpp"

using namespace bioamb;

namespace {

Model parse_ok(const std::string& src) {
  auto res = parse_model(src);
  if (auto* err = std::get_if<ParseError>(&res)) FAIL("parse failed: ", err->to_string());
  return std::get<Model>(std::move(res));
}

ParseError parse_err(const std::string& src) {
  auto res = parse_model(src);
  if (std::holds_alternative<Model>(res)) FAIL("expected a parse error");
  return std::get<ParseError>(res);
}

}  // namespace

TEST_CASE("smallest well-formed model") {
  Model m = parse_ok("group G { stay: Univ; } name a : amb(G) system a[ 0 ]");
  CHECK(m.groups.decls().size() == 1);
  CHECK(m.env.size() == 1);
  const ArgType* t = m.env.lookup("a");
  REQUIRE(t);
  REQUIRE(t->as_group());
  CHECK(t->as_group()->text == "G");
  const AmbientN* amb = m.system.as_ambient();
  REQUIRE(amb);
  CHECK(amb->name.text == "a");
  CHECK(amb->body.is_zero());
}

TEST_CASE("group declaration defaults") {
  Model m = parse_ok("group G\ngroup H { stay: G; }\nsystem 0");
  const GroupDecl& g = m.groups.lookup(GroupName{"G"});
  CHECK(g.stay == GroupSet{univ_group()});
  CHECK(g.cross == GroupSet{univ_group()});
  const GroupDecl& h = m.groups.lookup(GroupName{"H"});
  CHECK(h.stay == GroupSet{GroupName{"G"}});
  CHECK(h.cross == h.stay);  // omitted cross defaults to stay
}

TEST_CASE("a sum mixing capability and communication branches is rejected") {
  ParseError e = parse_err(
      "group G name h : cap(ea, {G}, {G}) name c : ch(group G) name m : amb(G)\n"
      "system enter h.0 + local c!{m}.0");
  CHECK(e.kind == ParseErrorKind::MixedSum);
  CHECK(e.line == 2);
}

TEST_CASE("blood fixture parses with three top-level ambients") {
  Model m = testgen::load_fixture("blood.ba");
  const ParN* par = m.system.as_par();
  REQUIRE(par);
  CHECK(par->comps.size() == 3);
  std::set<std::string> names;
  for (const auto& c : par->comps) {
    REQUIRE(c.as_ambient());
    names.insert(c.as_ambient()->name.text);
  }
  CHECK(names == std::set<std::string>{"t1", "t2", "t3"});
}

TEST_CASE("undeclared and duplicate declarations") {
  CHECK(parse_err("system a[ 0 ]").kind == ParseErrorKind::Undeclared);
  CHECK(parse_err("group G name a : amb(H) system 0").kind == ParseErrorKind::Undeclared);
  CHECK(parse_err("group G group G system 0").kind == ParseErrorKind::Duplicate);
  CHECK(parse_err("group G name a : amb(G) name a : amb(G) system 0").kind ==
        ParseErrorKind::Duplicate);
  CHECK(parse_err("group Univ system 0").kind == ParseErrorKind::Duplicate);
  // group and name identifiers share one model-wide namespace
  CHECK(parse_err("group G name G : amb(G) system 0").kind == ParseErrorKind::Duplicate);
}

TEST_CASE("groups may reference each other in any declaration order") {
  Model m = parse_ok("group A { stay: B; } group B { stay: A; } system 0");
  CHECK(m.groups.lookup(GroupName{"A"}).stay == GroupSet{GroupName{"B"}});
}

TEST_CASE("precedence: dot binds tighter than +, | loosest, ! tightest") {
  Model m = parse_ok(
      "group G name a : amb(G) name b : amb(G)\n"
      "name h : cap(ea, {G}, {G}) name k : cap(ee, {G}, {G})\n"
      "system enter h.exit k.0 + exit k.0 | !a[ 0 ] | b[ 0 ]");
  const ParN* par = m.system.as_par();
  REQUIRE(par);
  REQUIRE(par->comps.size() == 3);
  const SumN* sum = par->comps[0].as_sum();
  REQUIRE(sum);
  CHECK(sum->branches.size() == 2);  // the chain belongs to the first branch
  const SumN* chain = sum->branches[0].cont.as_sum();
  REQUIRE(chain);
  CHECK(std::get<CapPrefix>(chain->branches[0].prefix).op == CapOp::Exit);
  CHECK(par->comps[1].as_repl());
  CHECK(par->comps[1].as_repl()->body.as_ambient());
}

TEST_CASE("restriction syntax, scope and shadowing") {
  Model m = parse_ok(
      "group G name c : ch(group G) name a : amb(G)\n"
      "system (new n : amb(G)) (local c!{n}.0 | a[ 0 ])");
  const RestrictN* rn = m.system.as_restrict();
  REQUIRE(rn);
  CHECK(rn->name.text == "n");
  REQUIRE(rn->annot.as_group());
  // binders may shadow declared names
  parse_ok("group G name n : amb(G) system (new n : amb(G)) n[ 0 ]");
  // restriction inside a parallel composition extends to the right
  Model m2 = parse_ok(
      "group G name a : amb(G) name b : amb(G)\n"
      "system a[ 0 ] | (new x : amb(G)) x[ 0 ] | b[ 0 ]");
  const ParN* par = m2.system.as_par();
  REQUIRE(par);
  CHECK(par->comps.size() == 2);
  REQUIRE(par->comps[1].as_restrict());
  CHECK(par->comps[1].as_restrict()->body.as_par());
}

TEST_CASE("trailing .0 may be omitted") {
  Model a = parse_ok("group G name h : cap(ea, {G}, {G}) system enter h");
  Model b = parse_ok("group G name h : cap(ea, {G}, {G}) system enter h.0");
  CHECK(a.system == b.system);
}

TEST_CASE("comments and identifier lexicon") {
  Model m = parse_ok(
      "# heading comment\n"
      "group A+ # trailing comment\n"
      "name t-1' : amb(A+)\n"
      "system t-1'[ 0 ] # the end");
  CHECK(m.env.lookup("t-1'"));
}

TEST_CASE("input binder kind comes from the channel payload type") {
  Model m = parse_ok(
      "group G name c : ch(cap(mm, {G}, {G}))\n"
      "system local c?{w}.merge+ w.0");
  const SumN* sum = m.system.as_sum();
  REQUIRE(sum);
  const auto& ip = std::get<InputPrefix>(sum->branches[0].prefix);
  CHECK(ip.binder.kind == NameKind::Capability);
}

TEST_CASE("pretty: spec forms") {
  CHECK(pretty(proc_zero()) == "0");
  Process p = proc_ambient(Name{"a", NameKind::Ambient},
                           proc_prefix(CapPrefix{CapOp::Enter, Name{"h", NameKind::Capability}},
                                       proc_zero()));
  CHECK(pretty(p) == "a[ enter h.0 ]");
  CHECK(pretty(proc_warn(GroupName{"Bact"})) == "#warn(Bact)");
  CHECK(pretty(proc_exerror(GroupName{"E"}, GroupName{"B"})) == "#exerror(E,B)");
}

TEST_CASE("runtime forms parse only in runtime mode") {
  TypeEnv env;
  auto strict = parse_process("#warn(G)", env, false);
  CHECK(std::holds_alternative<ParseError>(strict));  // comment swallows the line -> empty input
  auto ok = parse_process("#warn(G) | #merror(A,B)", env, true);
  REQUIRE(std::holds_alternative<Process>(ok));
  CHECK(has_runtime_forms(std::get<Process>(ok)));
}

TEST_CASE("parse errors carry usable positions") {
  // Unexpected token: completing the text at the reported position fixes it.
  ParseError e = parse_err("group G name a : amb(G) system a[ 0");
  CHECK(e.kind == ParseErrorKind::Syntactic);
  std::string src = "group G name a : amb(G) system a[ 0";
  CHECK(e.line == 1);
  REQUIRE(static_cast<std::size_t>(e.column) >= src.size());  // at end of input
  parse_ok(src + " ]");

  std::string usrc = "group G name a : amb(G) system b[ 0 ]";
  ParseError u = parse_err(usrc);
  CHECK(u.kind == ParseErrorKind::Undeclared);
  CHECK(u.line == 1);
  CHECK(u.column == 32);  // points at b
  // truncating at the error position and completing differently removes it
  parse_ok(usrc.substr(0, static_cast<std::size_t>(u.column) - 1) + "a[ 0 ]");
}

TEST_CASE("parser is total on arbitrary input") {
  testgen::Rng rng(123);
  const std::string alphabet = "ab h[]{}()|+!?.:;,#\n01GUnivgroupnamesystem'-";
  for (int i = 0; i < 500; ++i) {
    std::string junk;
    int len = static_cast<int>(rng() % 60);
    for (int k = 0; k < len; ++k) junk += alphabet[rng() % alphabet.size()];
    auto res = parse_model(junk);  // must not throw or crash
    (void)res;
  }
  // pathological nesting depth is reported, not crashed on
  std::string deep = "group G name a : amb(G) system ";
  for (int i = 0; i < 5000; ++i) deep += "(";
  auto res = parse_model(deep);
  CHECK(std::holds_alternative<ParseError>(res));
}

TEST_CASE("round-trip: parse . pretty . parse is the identity on models") {
  testgen::Rng rng(20240812);
  for (int i = 0; i < 300; ++i) {
    Model m = testgen::random_model(rng);
    std::string text = pretty(m);
    auto res = parse_model(text);
    if (auto* err = std::get_if<ParseError>(&res)) {
      CAPTURE(text);
      FAIL("round-trip parse failed: ", err->to_string());
    }
    Model back = std::get<Model>(std::move(res));
    CHECK(back.system == m.system);
    CHECK(back.env.entries().size() == m.env.entries().size());
    for (std::size_t k = 0; k < m.env.entries().size(); ++k) {
      CHECK(back.env.entries()[k].first == m.env.entries()[k].first);
      CHECK(back.env.entries()[k].second == m.env.entries()[k].second);
    }
    CHECK(pretty(back) == text);
  }
}

TEST_CASE("fixtures round-trip") {
  for (const char* name : {"blood.ba", "conveyor.ba", "phage.ba"}) {
    Model m = testgen::load_fixture(name);
    auto res = parse_model(pretty(m));
    REQUIRE(std::holds_alternative<Model>(res));
    CHECK(std::get<Model>(res).system == m.system);
  }
}
