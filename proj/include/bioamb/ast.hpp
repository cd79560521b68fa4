#ifndef BIOAMB_AST_HPP
#define BIOAMB_AST_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

// Core syntax: names, group/capability/channel types, and the process AST
// with the runtime-only warn/error forms. All values are immutable after
// construction; subtrees are shared.

namespace bioamb {

// ---------------------------------------------------------------------------
// Names and groups

enum class NameKind { Ambient, Channel, Capability };

// A name's identity is its identifier text; the kind is metadata recorded at
// the declaration or binding site and never changes afterwards.
struct Name {
  std::string text;
  NameKind kind = NameKind::Ambient;

  friend bool operator==(const Name& a, const Name& b) { return a.text == b.text; }
  friend bool operator!=(const Name& a, const Name& b) { return a.text != b.text; }
  friend bool operator<(const Name& a, const Name& b) { return a.text < b.text; }
};

using NameSet = std::set<Name>;

// Group identifiers live in a namespace separate from Names. "Univ" is
// reserved: it denotes the universal group and needs no declaration.
struct GroupName {
  std::string text;

  bool is_univ() const { return text == "Univ"; }

  friend bool operator==(const GroupName& a, const GroupName& b) { return a.text == b.text; }
  friend bool operator!=(const GroupName& a, const GroupName& b) { return a.text != b.text; }
  friend bool operator<(const GroupName& a, const GroupName& b) { return a.text < b.text; }
};

inline GroupName univ_group() { return GroupName{"Univ"}; }

using GroupSet = std::set<GroupName>;

// A declared group G with its stay set S_G (where G-ambients may reside) and
// cross set C_G (whose boundaries G-ambients may cross). Invariant: C_G is
// included in S_G, where a stay set containing Univ absorbs any cross set.
struct GroupDecl {
  GroupName name;
  GroupSet stay;
  GroupSet cross;
};

// Ordered table of declared groups. Univ is implicit and resolves to the
// fully permissive declaration.
class GroupTable {
 public:
  bool declare(GroupDecl decl);  // false on duplicate
  bool declared(const GroupName& g) const;
  // Resolves Univ to {Univ}/{Univ}; throws std::out_of_range on unknown names.
  const GroupDecl& lookup(const GroupName& g) const;
  const std::vector<GroupDecl>& decls() const { return decls_; }
  bool empty() const { return decls_.empty(); }

 private:
  std::vector<GroupDecl> decls_;
  std::map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Types

enum class Label { EA, EE, MM };  // enter/accept, exit/expel, merge+/merge-

const char* label_text(Label l);

// Capability type (G1bar, G2bar)^L: mover groups, host groups, pairing label.
struct CapType {
  GroupSet movers;  // G1bar
  GroupSet hosts;   // G2bar
  Label label = Label::EA;

  friend bool operator==(const CapType& a, const CapType& b);
  friend bool operator<(const CapType& a, const CapType& b);
};

using CapSet = std::set<CapType>;

class ArgType;

// Channel type ch(T).
struct ChanType {
  std::shared_ptr<const ArgType> payload;
};

// Argument type T: a group, a capability type, or a channel type.
class ArgType {
 public:
  using Rep = std::variant<GroupName, CapType, ChanType>;

  ArgType() : rep_(univ_group()) {}
  explicit ArgType(GroupName g) : rep_(std::move(g)) {}
  explicit ArgType(CapType y) : rep_(std::move(y)) {}
  explicit ArgType(ChanType w) : rep_(std::move(w)) {}

  static ArgType group(GroupName g) { return ArgType(std::move(g)); }
  static ArgType cap(CapType y) { return ArgType(std::move(y)); }
  static ArgType chan(ArgType payload) {
    return ArgType(ChanType{std::make_shared<const ArgType>(std::move(payload))});
  }

  const Rep& rep() const { return rep_; }
  const GroupName* as_group() const { return std::get_if<GroupName>(&rep_); }
  const CapType* as_cap() const { return std::get_if<CapType>(&rep_); }
  const ChanType* as_chan() const { return std::get_if<ChanType>(&rep_); }

  // Kind of a name carrying this type.
  NameKind name_kind() const;

  friend bool operator==(const ArgType& a, const ArgType& b);
  friend bool operator!=(const ArgType& a, const ArgType& b) { return !(a == b); }
  friend bool operator<(const ArgType& a, const ArgType& b);

 private:
  Rep rep_;
};

// ---------------------------------------------------------------------------
// Prefixes

enum class Direction { Local, S2S, P2C, C2P };

const char* direction_text(Direction d);

enum class CapOp { Enter, Accept, Exit, Expel, MergePlus, MergeMinus };

const char* cap_op_text(CapOp op);
Label cap_op_label(CapOp op);

struct CapPrefix {
  CapOp op;
  Name name;
};

struct OutputPrefix {
  Direction dir;
  Name channel;
  Name payload;
};

struct InputPrefix {
  Direction dir;
  Name channel;
  Name binder;  // binding occurrence, scope = branch continuation
};

using Prefix = std::variant<CapPrefix, OutputPrefix, InputPrefix>;

bool operator==(const Prefix& a, const Prefix& b);
inline bool operator!=(const Prefix& a, const Prefix& b) { return !(a == b); }

enum class SumFlavor { Capability, Communication };

SumFlavor prefix_flavor(const Prefix& p);

// ---------------------------------------------------------------------------
// Processes

struct ProcNode;

class Process {
 public:
  Process();  // Zero

  const ProcNode& node() const { return *node_; }

  bool is_zero() const;
  const struct ParN* as_par() const;
  const struct SumN* as_sum() const;
  const struct AmbientN* as_ambient() const;
  const struct ReplN* as_repl() const;
  const struct RestrictN* as_restrict() const;
  const struct WarnN* as_warn() const;

  bool same_node(const Process& other) const { return node_ == other.node_; }

  friend bool operator==(const Process& a, const Process& b);
  friend bool operator!=(const Process& a, const Process& b) { return !(a == b); }

 private:
  explicit Process(std::shared_ptr<const ProcNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ProcNode> node_;

  friend Process make_process(ProcNode n);
};

struct Branch {
  Prefix prefix;
  Process cont;
};

struct ZeroN {};
struct RestrictN {
  Name name;
  ArgType annot;
  Process body;
};
struct ParN {
  std::vector<Process> comps;  // multiset; order is presentation only
};
struct ReplN {
  Process body;
};
struct AmbientN {
  Name name;
  Process body;
};
struct SumN {
  std::vector<Branch> branches;  // non-empty; all branches share the flavor
  SumFlavor flavor;
};
struct WarnN {
  GroupName group;
};
struct ExErrorN {
  GroupName host;
  GroupName mover;
};
struct MergeErrorN {
  GroupName host;
  GroupName content;
};

struct ProcNode {
  std::variant<ZeroN, RestrictN, ParN, ReplN, AmbientN, SumN, WarnN, ExErrorN, MergeErrorN> v;
};

Process make_process(ProcNode n);

inline bool Process::is_zero() const { return std::holds_alternative<ZeroN>(node_->v); }
inline const ParN* Process::as_par() const { return std::get_if<ParN>(&node_->v); }
inline const SumN* Process::as_sum() const { return std::get_if<SumN>(&node_->v); }
inline const AmbientN* Process::as_ambient() const { return std::get_if<AmbientN>(&node_->v); }
inline const ReplN* Process::as_repl() const { return std::get_if<ReplN>(&node_->v); }
inline const RestrictN* Process::as_restrict() const { return std::get_if<RestrictN>(&node_->v); }
inline const WarnN* Process::as_warn() const { return std::get_if<WarnN>(&node_->v); }

Process proc_zero();
Process proc_restrict(Name n, ArgType annot, Process body);
// Collapses: empty -> Zero, singleton -> the component. Does not flatten or
// drop Zero components; that is canonicalize's job.
Process proc_par(std::vector<Process> comps);
Process proc_repl(Process body);
Process proc_ambient(Name a, Process body);
// Flavor derived from the first branch; throws std::invalid_argument on an
// empty branch list or mixed flavors.
Process proc_sum(std::vector<Branch> branches);
// Single-branch sum, the usual prefixed-process shorthand.
Process proc_prefix(Prefix p, Process cont);
Process proc_warn(GroupName g);
Process proc_exerror(GroupName host, GroupName mover);
Process proc_merror(GroupName host, GroupName content);

// ---------------------------------------------------------------------------
// Name hygiene

// Free names; Restrict and Input binders bind within their scope, everything
// else (ambient names, channel subjects, payloads, capability names) is free.
NameSet free_names(const Process& p);

// All identifiers occurring anywhere in p, bound or free.
NameSet all_names(const Process& p);

// Capture-avoiding substitution of every free occurrence of `target` by
// `replacement`; binders that would capture `replacement` are alpha-renamed
// with fresh_name first.
Process substitute(const Process& p, const Name& target, const Name& replacement);

// Deterministic fresh name: `hint` itself if unused, otherwise hint1, hint2,
// ... with the smallest positive suffix avoiding `avoid`.
Name fresh_name(const Name& hint, const NameSet& avoid);

// Structural audit: every Sum's stored flavor matches all of its branches.
bool audit_sum_flavors(const Process& p);

// True if the term contains a Warn/ExError/MergeError node anywhere.
bool has_runtime_forms(const Process& p);

}  // namespace bioamb

#endif  // BIOAMB_AST_HPP
