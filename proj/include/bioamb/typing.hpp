#ifndef BIOAMB_TYPING_HPP
#define BIOAMB_TYPING_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bioamb/ast.hpp"
#include "bioamb/parser.hpp"
#include "bioamb/typing_env.hpp"

// The group type system: capability-type well-formedness, Y-G compatibility,
// and the synthesis judgment  Gamma |- P : Gbar ; Delta  where Gbar collects
// the groups of P's top-level ambients and Delta the capability types used by
// P's own prefixes (emptied at each ambient boundary).

namespace bioamb {

struct Judgment {
  GroupSet groups;  // Gbar
  CapSet caps;      // Delta

  friend bool operator==(const Judgment& a, const Judgment& b) {
    return a.groups == b.groups && a.caps == b.caps;
  }
};

enum class TypeErrorKind {
  IllFormedCap,
  StayViolation,
  IncompatCap,
  PrefixMismatch,
  ChannelMismatch,
  UnknownName,
  KindMismatch,
};

const char* type_error_kind_text(TypeErrorKind k);

struct TypeError {
  TypeErrorKind kind;
  std::string subject;            // offending name or rendered capability type
  std::string context;            // group name or free-form detail
  std::vector<std::size_t> path;  // root-to-subterm child indices

  std::string to_string() const;
};

using TypingResult = std::variant<Judgment, TypeError>;

// True iff g is in s, or s contains Univ (a stay/cross set containing Univ
// admits every group).
bool member_group(const GroupName& g, const GroupSet& s);

// Def-style well-formedness for capability types: an ea- or ee-labelled type
// is ill-formed iff some host group is not crossable by some mover group;
// mm-labelled types are always well formed. On failure returns the first
// witnessing (host, mover) pair in sorted order.
struct WellFormed {
  bool ok = true;
  std::optional<std::pair<GroupName, GroupName>> witness;  // (host Gi, mover Gj)
};
WellFormed well_formed_cap(const CapType& y, const GroupTable& groups);

// Y is compatible with G iff Y is well formed and G occurs in Y's mover or
// host set (plain membership; the sets enumerate participants).
bool compatible(const CapType& y, const GroupName& g, const GroupTable& groups);

// Algorithmic synthesis of the typing judgment. `p` must be runtime-free;
// passing warn/error forms throws std::invalid_argument.
TypingResult type_process(const TypeEnv& env, const GroupTable& groups, const Process& p);

// Whole-model check: declaration-level findings (ill-formed capability types
// anywhere in Gamma's types, cross sets not included in stay sets, unknown
// groups) plus, when none are found, the system process's judgment.
struct CheckReport {
  bool ok = false;
  Judgment judgment;               // valid when ok
  std::vector<TypeError> errors;   // declaration findings, then process errors

  std::string to_json() const;  // {status, groups[], deltas[], errors[]}
};

CheckReport check_model(const Model& m);

std::string cap_type_text(const CapType& y);

}  // namespace bioamb

#endif  // BIOAMB_TYPING_HPP
