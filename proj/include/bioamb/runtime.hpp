#ifndef BIOAMB_RUNTIME_HPP
#define BIOAMB_RUNTIME_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bioamb/ast.hpp"
#include "bioamb/typing.hpp"
#include "bioamb/typing_env.hpp"

// Typed operational semantics: structural-congruence canonicalization, redex
// enumeration (with budgeted replication unfolding), and reduction with
// warnings and exit/merge error verdicts.

namespace bioamb {

// Canonical normal form for the structural congruence: parallel compositions
// flattened and sorted, nil components dropped, dead restrictions removed,
// restrictions pushed maximally inward and chains ordered canonically, !0
// collapsed, and binders renamed to an indexed scheme. Idempotent; congruent
// terms (modulo replication unfolding) share one normal form.
Process canonicalize(const Process& p);

// ---------------------------------------------------------------------------
// Runtime states

// A running configuration. `term` is canonical, contains Warn only as
// top-level components and no error forms; every unguarded restriction has
// been opened (binder removed, name freshened and registered in `env`).
struct RuntimeState {
  Process term;
  TypeEnv env;
  GroupTable groups;
};

// Canonicalizes and opens unguarded restrictions, registering opened names.
RuntimeState make_state(Process term, TypeEnv env, GroupTable groups);

std::string state_pretty(const RuntimeState& s);
// Stable 64-bit FNV-1a over the canonical pretty form plus the types of the
// term's free names; hex-encoded.
std::string state_hash(const RuntimeState& s);
std::uint64_t fnv1a64(std::string_view data);

// ---------------------------------------------------------------------------
// Redexes

enum class Rule { RedIn, RedOut, RedMerge, RedLocal, RedParentOutput, RedParentInput, RedSibling };

const char* rule_text(Rule r);

// A path into the state term. ParIdx indexes a component of the (flattened)
// parallel composition at the current level, AmbBody enters an ambient's
// body, ReplCopy(j) enters the j-th virtual copy of a replication (1-based;
// copies only materialize when a redex using them is applied).
struct PathStep {
  enum class Kind { ParIdx, AmbBody, ReplCopy };
  Kind kind = Kind::ParIdx;
  int index = 0;

  friend bool operator==(const PathStep& a, const PathStep& b) {
    return a.kind == b.kind && a.index == b.index;
  }
  friend bool operator<(const PathStep& a, const PathStep& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.index < b.index;
  }
};

using TermPath = std::vector<PathStep>;

std::string path_text(const TermPath& p);

// One side of a redex: the path to the participating sum and the chosen
// branch within it. The remaining branches are discarded when the rule fires.
struct Participant {
  TermPath sum_path;
  int branch = 0;

  friend bool operator==(const Participant& x, const Participant& y) {
    return x.sum_path == y.sum_path && x.branch == y.branch;
  }
};

struct Redex {
  Rule rule;
  TermPath site;  // the enclosing parallel context ([] = top level)
  Participant a;  // mover / output side
  Participant b;  // host / input side
  Name sync;      // the capability or channel synchronized on
  int repl_unfoldings = 0;  // replication copies this redex materializes
};

// Every redex reachable without unfolding, plus those exposed by unfolding
// each replication at most `repl_budget` times. Deterministic order:
// lexicographic on (site, rule, participants).
std::vector<Redex> enumerate_redexes(const RuntimeState& s, int repl_budget);

// ---------------------------------------------------------------------------
// Outcomes

struct ErrorVerdict {
  enum class Kind { Exit, Merge };
  Kind kind;
  GroupName host;
  GroupName offender;
};

struct NextState {
  RuntimeState state;
  std::optional<GroupName> emitted_warn;  // warn left at top level, if any
  // Movement safety check for RedIn (entered ambient's group must lie in the
  // mover's stay set); holds for every step from a well-typed process that
  // uses capabilities in their declared roles.
  bool redin_stay_ok = true;
};

using Outcome = std::variant<NextState, ErrorVerdict>;

struct RuntimeOptions {
  // With strict_merge, a merge additionally re-types the whole merged body
  // and turns any typing failure into a merge error; the default checks only
  // the incoming content's groups against the receiver's stay sets.
  bool strict_merge = false;
};

// Applies one redex. `r` must come from enumerate_redexes on `s` (with budget
// at least r.repl_unfoldings). Exit warns are resolved at the nearest
// enclosing ambient in the same step; at top level the warn persists and is
// reported via emitted_warn.
Outcome apply_redex(const RuntimeState& s, const Redex& r, const RuntimeOptions& opts = {});

struct Successor {
  Redex redex;
  Outcome outcome;
};

// enumerate_redexes + apply_redex, in enumeration order. Successors leading
// to identical states are retained, each with its own redex.
std::vector<Successor> successors(const RuntimeState& s, int repl_budget,
                                  const RuntimeOptions& opts = {});

// Types the state term with top-level warns stripped.
TypingResult type_state(const RuntimeState& s);

// Top-level warn groups of the state, in component order.
std::vector<GroupName> top_level_warns(const RuntimeState& s);

}  // namespace bioamb

#endif  // BIOAMB_RUNTIME_HPP
