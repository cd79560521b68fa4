#ifndef BIOAMB_PARSER_HPP
#define BIOAMB_PARSER_HPP

#include <string>
#include <variant>
#include <vector>

#include "bioamb/ast.hpp"
#include "bioamb/typing_env.hpp"

// Parser and pretty-printer for the `.ba` model format:
//
//   model      := groupdecl* namedecl* "system" process
//   groupdecl  := "group" GID [ "{" [ "stay" ":" gidlist ";" ]
//                               [ "cross" ":" gidlist ";" ] "}" ]
//   namedecl   := "name" NID ":" typeexpr
//   typeexpr   := "amb" "(" GID ")"
//               | "cap" "(" label "," "{" gidlist "}" "," "{" gidlist "}" ")"
//               | "ch" "(" argtype ")"
//   argtype    := "group" GID | cap(...) | ch(...)
//   process    := "0" | "(" "new" NID ":" typeexpr ")" process | par of sums
//
// `#` starts a line comment; identifiers match [A-Za-z][A-Za-z0-9_+'-]*.
// Omitted stay defaults to {Univ}; omitted cross defaults to the stay set.
// `+` binds looser than `.`, `|` looser than `+`, `!` tightest; a trailing
// `.0` may be omitted.

namespace bioamb {

// A parsed model: the declared group universe, the name environment, and the
// system process. Every free name of `system` is declared in `env`; every
// referenced group is declared (or Univ).
struct Model {
  GroupTable groups;
  TypeEnv env;
  Process system;
};

enum class ParseErrorKind { Lexical, Syntactic, MixedSum, Undeclared, Duplicate };

const char* parse_error_kind_text(ParseErrorKind k);

struct ParseError {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  std::string message;
  ParseErrorKind kind = ParseErrorKind::Syntactic;

  std::string to_string() const;
};

using ParseResult = std::variant<Model, ParseError>;

// Total: never throws on arbitrary input.
ParseResult parse_model(const std::string& source);

// Parses a bare process. Name kinds are resolved against `env` where
// possible. With `allow_runtime`, accepts the #warn/#exerror/#merror trace
// notation; used to re-read pretty-printed runtime states.
std::variant<Process, ParseError> parse_process(const std::string& source, const TypeEnv& env,
                                                bool allow_runtime = false);

// Pretty-printing. Output re-parses to a structurally identical value for
// runtime-free input; runtime forms render as #warn(G) / #exerror(G,G') /
// #merror(G,G') for trace display.
std::string pretty(const Process& p);
std::string pretty(const Model& m);
std::string pretty_typeexpr(const ArgType& t);  // amb(G) / cap(...) / ch(...)
std::string pretty_argtype(const ArgType& t);   // group G / cap(...) / ch(...)
std::string pretty_prefix(const Prefix& p);

}  // namespace bioamb

#endif  // BIOAMB_PARSER_HPP
