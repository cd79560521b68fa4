#include "bioamb/parser.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace bioamb {

const char* parse_error_kind_text(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::Lexical: return "lexical";
    case ParseErrorKind::Syntactic: return "syntactic";
    case ParseErrorKind::MixedSum: return "mixed_sum";
    case ParseErrorKind::Undeclared: return "undeclared";
    case ParseErrorKind::Duplicate: return "duplicate";
  }
  return "?";
}

std::string ParseError::to_string() const {
  std::ostringstream os;
  os << line << ":" << column << ": " << parse_error_kind_text(kind) << ": " << message;
  return os.str();
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident,
  Zero,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Colon,
  Semi,
  Comma,
  Dot,
  Bar,
  Plus,
  Bang,
  Question,
  RtWarn,
  RtExError,
  RtMergeError,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '\'' ||
         c == '-';
}

std::vector<Token> lex(const std::string& src, bool allow_runtime) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      if (allow_runtime) {
        auto starts = [&](const char* kw) {
          std::size_t n = std::string(kw).size();
          return src.compare(i + 1, n, kw) == 0;
        };
        if (starts("warn")) {
          out.push_back({Tok::RtWarn, "#warn", line, col});
          advance(5);
          continue;
        }
        if (starts("exerror")) {
          out.push_back({Tok::RtExError, "#exerror", line, col});
          advance(8);
          continue;
        }
        if (starts("merror")) {
          out.push_back({Tok::RtMergeError, "#merror", line, col});
          advance(7);
          continue;
        }
      }
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int tl = line, tc = col;
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), tl, tc});
      advance(j - i);
      continue;
    }
    Tok k;
    switch (c) {
      case '0': k = Tok::Zero; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case ':': k = Tok::Colon; break;
      case ';': k = Tok::Semi; break;
      case ',': k = Tok::Comma; break;
      case '.': k = Tok::Dot; break;
      case '|': k = Tok::Bar; break;
      case '+': k = Tok::Plus; break;
      case '!': k = Tok::Bang; break;
      case '?': k = Tok::Question; break;
      default:
        throw ParseError{tl, tc, std::string("unexpected character '") + c + "'",
                         ParseErrorKind::Lexical};
    }
    out.push_back({k, std::string(1, c), tl, tc});
    advance(1);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::set<std::string> kKeywords = {
    "group", "name",  "system", "stay",  "cross",  "amb",    "cap",   "ch",
    "new",   "enter", "accept", "exit",  "expel",  "merge+", "merge-", "local",
    "s2s",   "p2c",   "c2p",    "ea",    "ee",     "mm"};

// ---------------------------------------------------------------------------
// Parser

// Scope entry: the type of a name where known; input binders over channels of
// unresolved type carry nullopt (the typing pass reports the real error).
using Scope = std::map<std::string, std::optional<ArgType>>;

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;
  const GroupTable* groups = nullptr;  // null: skip group-reference checks
  bool allow_runtime = false;
  int depth = 0;

  const Token& cur() const { return toks[pos]; }
  const Token& peek(std::size_t n = 1) const {
    return toks[std::min(pos + n, toks.size() - 1)];
  }
  Token eat() { return toks[pos++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg,
                         ParseErrorKind k = ParseErrorKind::Syntactic) const {
    throw ParseError{t.line, t.column, msg, k};
  }

  Token expect(Tok k, const std::string& what) {
    if (cur().kind != k) fail(cur(), "expected " + what);
    return eat();
  }

  bool is_kw(const Token& t, const char* kw) const {
    return t.kind == Tok::Ident && t.text == kw;
  }

  Token expect_kw(const char* kw) {
    if (!is_kw(cur(), kw)) fail(cur(), std::string("expected '") + kw + "'");
    return eat();
  }

  std::string expect_ident(const std::string& what) {
    if (cur().kind != Tok::Ident) fail(cur(), "expected " + what);
    if (kKeywords.count(cur().text))
      fail(cur(), "'" + cur().text + "' is a keyword and cannot be used as " + what);
    return eat().text;
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth > 2000)
        p.fail(p.cur(), "nesting too deep");
    }
    ~DepthGuard() { --p.depth; }
  };

  // -- groups ---------------------------------------------------------------

  GroupName parse_gid() {
    Token t = cur();
    std::string id = expect_ident("a group identifier");
    (void)t;
    return GroupName{id};
  }

  void check_group(const GroupName& g, const Token& at) const {
    if (groups && !groups->declared(g))
      fail(at, "undeclared group '" + g.text + "'", ParseErrorKind::Undeclared);
  }

  GroupName parse_checked_gid() {
    Token at = cur();
    GroupName g{expect_ident("a group identifier")};
    check_group(g, at);
    return g;
  }

  GroupSet parse_gidlist() {
    GroupSet out;
    out.insert(parse_checked_gid());
    while (cur().kind == Tok::Comma) {
      eat();
      out.insert(parse_checked_gid());
    }
    return out;
  }

  // -- types ----------------------------------------------------------------

  Label parse_label() {
    if (is_kw(cur(), "ea")) return eat(), Label::EA;
    if (is_kw(cur(), "ee")) return eat(), Label::EE;
    if (is_kw(cur(), "mm")) return eat(), Label::MM;
    fail(cur(), "expected a label (ea, ee or mm)");
  }

  ArgType parse_typeexpr() {
    DepthGuard g(*this);
    if (is_kw(cur(), "amb")) {
      eat();
      expect(Tok::LParen, "'('");
      GroupName gid = parse_checked_gid();
      expect(Tok::RParen, "')'");
      return ArgType::group(gid);
    }
    if (is_kw(cur(), "cap")) {
      eat();
      expect(Tok::LParen, "'('");
      Label l = parse_label();
      expect(Tok::Comma, "','");
      expect(Tok::LBrace, "'{'");
      GroupSet movers = parse_gidlist();
      expect(Tok::RBrace, "'}'");
      expect(Tok::Comma, "','");
      expect(Tok::LBrace, "'{'");
      GroupSet hosts = parse_gidlist();
      expect(Tok::RBrace, "'}'");
      expect(Tok::RParen, "')'");
      return ArgType::cap(CapType{std::move(movers), std::move(hosts), l});
    }
    if (is_kw(cur(), "ch")) {
      eat();
      expect(Tok::LParen, "'('");
      ArgType payload = parse_argtype();
      expect(Tok::RParen, "')'");
      return ArgType::chan(std::move(payload));
    }
    fail(cur(), "expected a type (amb, cap or ch)");
  }

  ArgType parse_argtype() {
    if (is_kw(cur(), "group")) {
      eat();
      return ArgType::group(parse_checked_gid());
    }
    return parse_typeexpr();
  }

  // -- processes --------------------------------------------------------------

  std::optional<ArgType> scope_lookup(const Scope& scope, const Token& at,
                                      const std::string& what) const {
    auto it = scope.find(at.text);
    if (it == scope.end())
      fail(at, "undeclared name '" + at.text + "' used as " + what, ParseErrorKind::Undeclared);
    return it->second;
  }

  Name use_name(const Scope& scope, const std::string& what) {
    Token at = cur();
    std::string id = expect_ident(what);
    Token named = at;
    named.text = id;
    auto t = scope_lookup(scope, named, what);
    NameKind kind = t ? t->name_kind() : NameKind::Channel;
    return Name{id, kind};
  }

  bool at_cap_op() const {
    return is_kw(cur(), "enter") || is_kw(cur(), "accept") || is_kw(cur(), "exit") ||
           is_kw(cur(), "expel") || is_kw(cur(), "merge+") || is_kw(cur(), "merge-");
  }

  bool at_direction() const {
    return is_kw(cur(), "local") || is_kw(cur(), "s2s") || is_kw(cur(), "p2c") ||
           is_kw(cur(), "c2p");
  }

  CapOp parse_cap_op() {
    std::string t = eat().text;
    if (t == "enter") return CapOp::Enter;
    if (t == "accept") return CapOp::Accept;
    if (t == "exit") return CapOp::Exit;
    if (t == "expel") return CapOp::Expel;
    if (t == "merge+") return CapOp::MergePlus;
    return CapOp::MergeMinus;
  }

  Direction parse_direction() {
    std::string t = eat().text;
    if (t == "local") return Direction::Local;
    if (t == "s2s") return Direction::S2S;
    if (t == "p2c") return Direction::P2C;
    return Direction::C2P;
  }

  Process parse_process(const Scope& scope) {
    DepthGuard g(*this);
    std::vector<Process> comps;
    std::vector<Token> starts;
    starts.push_back(cur());
    comps.push_back(parse_sum(scope));
    while (cur().kind == Tok::Bar) {
      eat();
      starts.push_back(cur());
      comps.push_back(parse_sum(scope));
    }
    return proc_par(std::move(comps));
  }

  Process parse_sum(const Scope& scope) {
    Token first_at = cur();
    std::vector<std::pair<Token, Process>> terms;
    terms.emplace_back(cur(), parse_term(scope));
    while (cur().kind == Tok::Plus) {
      eat();
      terms.emplace_back(cur(), parse_term(scope));
    }
    if (terms.size() == 1) return std::move(terms.front().second);
    // A choice: every operand must be a prefixed branch; flavors must agree.
    std::vector<Branch> branches;
    std::optional<SumFlavor> flavor;
    for (auto& [at, t] : terms) {
      const SumN* s = t.as_sum();
      if (!s) fail(at, "only prefixed processes may appear in a choice");
      if (!flavor) flavor = s->flavor;
      if (s->flavor != *flavor)
        fail(at, "choice mixes capability and communication prefixes", ParseErrorKind::MixedSum);
      for (const auto& b : s->branches) branches.push_back(b);
    }
    (void)first_at;
    return proc_sum(std::move(branches));
  }

  Process parse_term(const Scope& scope) {
    DepthGuard g(*this);
    if (cur().kind == Tok::Zero) {
      eat();
      return proc_zero();
    }
    if (cur().kind == Tok::LParen) {
      if (is_kw(peek(), "new")) return parse_restriction(scope);
      eat();
      Process p = parse_process(scope);
      expect(Tok::RParen, "')'");
      return p;
    }
    if (cur().kind == Tok::Bang) {
      eat();
      return proc_repl(parse_term(scope));
    }
    if (cur().kind == Tok::RtWarn) {
      eat();
      expect(Tok::LParen, "'('");
      GroupName gid = parse_checked_gid();
      expect(Tok::RParen, "')'");
      return proc_warn(gid);
    }
    if (cur().kind == Tok::RtExError || cur().kind == Tok::RtMergeError) {
      bool ex = cur().kind == Tok::RtExError;
      eat();
      expect(Tok::LParen, "'('");
      GroupName host = parse_checked_gid();
      expect(Tok::Comma, "','");
      GroupName other = parse_checked_gid();
      expect(Tok::RParen, "')'");
      return ex ? proc_exerror(host, other) : proc_merror(host, other);
    }
    if (at_cap_op()) {
      CapOp op = parse_cap_op();
      Name h = use_name(scope, "a capability name");
      Process cont = parse_continuation(scope);
      return proc_prefix(CapPrefix{op, h}, std::move(cont));
    }
    if (at_direction()) {
      Direction dir = parse_direction();
      Token chan_at = cur();
      Name channel = use_name(scope, "a channel name");
      std::optional<ArgType> chan_type = scope.at(channel.text);
      (void)chan_at;
      bool output;
      if (cur().kind == Tok::Bang) {
        output = true;
      } else if (cur().kind == Tok::Question) {
        output = false;
      } else {
        fail(cur(), "expected '!' or '?' after channel name");
      }
      eat();
      expect(Tok::LBrace, "'{'");
      if (output) {
        Name payload = use_name(scope, "a message name");
        expect(Tok::RBrace, "'}'");
        Process cont = parse_continuation(scope);
        return proc_prefix(OutputPrefix{dir, channel, payload}, std::move(cont));
      }
      std::string binder_id = expect_ident("a binder name");
      expect(Tok::RBrace, "'}'");
      std::optional<ArgType> binder_type;
      if (chan_type && chan_type->as_chan()) binder_type = *chan_type->as_chan()->payload;
      Name binder{binder_id,
                  binder_type ? binder_type->name_kind() : NameKind::Channel};
      Scope inner = scope;
      inner[binder_id] = binder_type;
      Process cont = parse_continuation(inner);
      return proc_prefix(InputPrefix{dir, channel, binder}, std::move(cont));
    }
    if (cur().kind == Tok::Ident) {
      if (kKeywords.count(cur().text)) fail(cur(), "unexpected '" + cur().text + "'");
      if (peek().kind != Tok::LBracket)
        fail(peek(), "expected '[' after ambient name '" + cur().text + "'");
      Name amb = use_name(scope, "an ambient name");
      expect(Tok::LBracket, "'['");
      Process body = parse_process(scope);
      expect(Tok::RBracket, "']'");
      return proc_ambient(amb, std::move(body));
    }
    fail(cur(), "expected a process");
  }

  Process parse_continuation(const Scope& scope) {
    if (cur().kind != Tok::Dot) return proc_zero();  // trailing .0 omitted
    eat();
    return parse_term(scope);
  }

  Process parse_restriction(const Scope& scope) {
    expect(Tok::LParen, "'('");
    expect_kw("new");
    std::string id = expect_ident("a name");
    expect(Tok::Colon, "':'");
    ArgType annot = parse_typeexpr();
    expect(Tok::RParen, "')'");
    Name binder{id, annot.name_kind()};
    Scope inner = scope;
    inner[id] = annot;
    Process body = parse_process(inner);
    return proc_restrict(binder, annot, std::move(body));
  }

  // -- model ------------------------------------------------------------------

  Model parse_model_toplevel() {
    Model m;
    // Group declarations first; stay/cross references are validated after the
    // whole block so groups may refer to each other in any order.
    std::vector<std::pair<GroupName, Token>> pending_refs;
    while (is_kw(cur(), "group")) {
      eat();
      Token at = cur();
      std::string id = expect_ident("a group identifier");
      if (id == "Univ")
        fail(at, "'Univ' is reserved and cannot be redeclared", ParseErrorKind::Duplicate);
      GroupDecl decl{GroupName{id}, {}, {}};
      bool has_stay = false, has_cross = false;
      if (cur().kind == Tok::LBrace) {
        eat();
        if (is_kw(cur(), "stay")) {
          eat();
          expect(Tok::Colon, "':'");
          decl.stay = parse_gidlist_deferred(pending_refs);
          expect(Tok::Semi, "';'");
          has_stay = true;
        }
        if (is_kw(cur(), "cross")) {
          eat();
          expect(Tok::Colon, "':'");
          decl.cross = parse_gidlist_deferred(pending_refs);
          expect(Tok::Semi, "';'");
          has_cross = true;
        }
        expect(Tok::RBrace, "'}'");
      }
      if (!has_stay) decl.stay = {univ_group()};
      if (!has_cross) decl.cross = decl.stay;  // S_G = C_G when C_G is left out
      if (!m.groups.declare(decl))
        fail(at, "duplicate group '" + id + "'", ParseErrorKind::Duplicate);
    }
    groups = &m.groups;
    for (const auto& [g, at] : pending_refs) {
      if (!m.groups.declared(g))
        fail(at, "undeclared group '" + g.text + "'", ParseErrorKind::Undeclared);
    }
    // Name declarations.
    while (is_kw(cur(), "name")) {
      eat();
      Token at = cur();
      std::string id = expect_ident("a name");
      if (id == "Univ" || m.groups.declared(GroupName{id}))
        fail(at, "'" + id + "' is already a group identifier", ParseErrorKind::Duplicate);
      expect(Tok::Colon, "':'");
      ArgType t = parse_typeexpr();
      if (!m.env.extend(Name{id, t.name_kind()}, t))
        fail(at, "duplicate name '" + id + "'", ParseErrorKind::Duplicate);
    }
    expect_kw("system");
    Scope scope;
    for (const auto& [n, t] : m.env.entries()) scope[n.text] = t;
    m.system = parse_process(scope);
    if (cur().kind != Tok::End) fail(cur(), "unexpected input after system process");
    return m;
  }

  // gidlist inside a group declaration: references checked later.
  GroupSet parse_gidlist_deferred(std::vector<std::pair<GroupName, Token>>& refs) {
    GroupSet out;
    for (;;) {
      Token at = cur();
      GroupName g{expect_ident("a group identifier")};
      refs.emplace_back(g, at);
      out.insert(g);
      if (cur().kind != Tok::Comma) break;
      eat();
    }
    return out;
  }
};

}  // namespace

ParseResult parse_model(const std::string& source) {
  try {
    Parser p;
    p.toks = lex(source, /*allow_runtime=*/false);
    return p.parse_model_toplevel();
  } catch (const ParseError& e) {
    return e;
  }
}

std::variant<Process, ParseError> parse_process(const std::string& source, const TypeEnv& env,
                                                bool allow_runtime) {
  try {
    Parser p;
    p.allow_runtime = allow_runtime;
    p.toks = lex(source, allow_runtime);
    Scope scope;
    for (const auto& [n, t] : env.entries()) scope[n.text] = t;
    Process proc = p.parse_process(scope);
    if (p.cur().kind != Tok::End) p.fail(p.cur(), "unexpected input after process");
    return proc;
  } catch (const ParseError& e) {
    return e;
  }
}

// ---------------------------------------------------------------------------
// Pretty-printing

namespace {

std::string join_groups(const GroupSet& gs) {
  std::string out;
  for (const auto& g : gs) {
    if (!out.empty()) out += ", ";
    out += g.text;
  }
  return out;
}

// Precedence levels: 0 process, 1 par, 2 sum, 3 term.
std::string render(const Process& p, int level);

std::string render_branch(const Branch& b) {
  return pretty_prefix(b.prefix) + "." + render(b.cont, 3);
}

std::string render(const Process& p, int level) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ZeroN>) {
          return "0";
        } else if constexpr (std::is_same_v<T, WarnN>) {
          return "#warn(" + n.group.text + ")";
        } else if constexpr (std::is_same_v<T, ExErrorN>) {
          return "#exerror(" + n.host.text + "," + n.mover.text + ")";
        } else if constexpr (std::is_same_v<T, MergeErrorN>) {
          return "#merror(" + n.host.text + "," + n.content.text + ")";
        } else if constexpr (std::is_same_v<T, ParN>) {
          std::string out;
          for (const auto& c : n.comps) {
            if (!out.empty()) out += " | ";
            out += render(c, 2);
          }
          return level > 1 ? "(" + out + ")" : out;
        } else if constexpr (std::is_same_v<T, SumN>) {
          if (n.branches.size() == 1) return render_branch(n.branches.front());
          std::string out;
          for (const auto& b : n.branches) {
            if (!out.empty()) out += " + ";
            out += render_branch(b);
          }
          return level > 2 ? "(" + out + ")" : out;
        } else if constexpr (std::is_same_v<T, ReplN>) {
          return "!" + render(n.body, 3);
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          return n.name.text + "[ " + render(n.body, 0) + " ]";
        } else {  // RestrictN
          std::string out =
              "(new " + n.name.text + " : " + pretty_typeexpr(n.annot) + ") " + render(n.body, 0);
          return level > 0 ? "(" + out + ")" : out;
        }
      },
      p.node().v);
}

}  // namespace

std::string pretty_typeexpr(const ArgType& t) {
  if (auto* g = t.as_group()) return "amb(" + g->text + ")";
  if (auto* y = t.as_cap()) {
    return std::string("cap(") + label_text(y->label) + ", {" + join_groups(y->movers) + "}, {" +
           join_groups(y->hosts) + "})";
  }
  return "ch(" + pretty_argtype(*t.as_chan()->payload) + ")";
}

std::string pretty_argtype(const ArgType& t) {
  if (auto* g = t.as_group()) return "group " + g->text;
  return pretty_typeexpr(t);
}

std::string pretty_prefix(const Prefix& p) {
  if (auto* cp = std::get_if<CapPrefix>(&p))
    return std::string(cap_op_text(cp->op)) + " " + cp->name.text;
  if (auto* op = std::get_if<OutputPrefix>(&p))
    return std::string(direction_text(op->dir)) + " " + op->channel.text + "!{" +
           op->payload.text + "}";
  auto* ip = std::get_if<InputPrefix>(&p);
  return std::string(direction_text(ip->dir)) + " " + ip->channel.text + "?{" + ip->binder.text +
         "}";
}

std::string pretty(const Process& p) { return render(p, 0); }

std::string pretty(const Model& m) {
  std::ostringstream os;
  for (const auto& d : m.groups.decls()) {
    os << "group " << d.name.text << " { stay: " << join_groups(d.stay)
       << "; cross: " << join_groups(d.cross) << "; }\n";
  }
  for (const auto& [n, t] : m.env.entries()) {
    os << "name " << n.text << " : " << pretty_typeexpr(t) << "\n";
  }
  os << "system " << render(m.system, 0) << "\n";
  return os.str();
}

}  // namespace bioamb
