#ifndef BIOAMB_EXPLORER_HPP
#define BIOAMB_EXPLORER_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bioamb/parser.hpp"
#include "bioamb/runtime.hpp"

// Bounded breadth-first exploration of the reachable state space, reachable
// error reporting, and empirical per-step verification that well-typed states
// only step to well-typed states or explicit error verdicts.

namespace bioamb {

struct Bounds {
  int max_depth = 32;
  int max_states = 10000;
  int repl_budget = 1;
};

// One step of an error witness: the index of the redex in enumeration order
// at the state it fires from, plus display data.
struct WitnessStep {
  int redex_index;
  Rule rule;
  std::string sync;
};

struct StateRecord {
  RuntimeState state;
  std::string pretty;
  int depth = 0;
  bool typed = false;
  std::vector<GroupName> warns;
};

struct EdgeRecord {
  std::string from;
  int redex_index;
  Rule rule;
  std::string sync;
  std::string site;
  std::optional<std::string> to;           // hash of the target state
  std::optional<ErrorVerdict> error;       // or a terminal verdict
  std::optional<GroupName> emitted_warn;
};

struct ErrorRecord {
  ErrorVerdict verdict;
  std::vector<WitnessStep> witness;  // minimal-length replay from the initial state
};

struct StateGraph {
  std::string initial;
  std::map<std::string, StateRecord> states;
  std::vector<EdgeRecord> edges;
  std::vector<ErrorRecord> errors;  // deduplicated by (kind, host, offender)
  bool truncated = false;
  Bounds bounds;
};

// Raised when a model fails its static check; exploration is defined on
// well-typed models only.
class ModelTypeError : public std::runtime_error {
 public:
  explicit ModelTypeError(CheckReport report);
  const CheckReport& report() const { return report_; }

 private:
  CheckReport report_;
};

RuntimeState initial_state(const Model& m);

// BFS from the canonical initial state, deduplicating by state hash. Errors
// are absorbing. Throws ModelTypeError if check_model reports problems.
StateGraph explore(const Model& m, const Bounds& b, const RuntimeOptions& opts = {});

struct Counterexample {
  std::string state_hash;
  std::string state_pretty;
  std::optional<WitnessStep> step;  // absent: the state itself fails to type
  std::string detail;
};

struct TheoremReport {
  enum class Status { Pass, TruncatedPass, Fail };
  Status status = Status::Pass;
  int states_checked = 0;
  int transitions_checked = 0;
  int errors_reached = 0;
  std::vector<Counterexample> counterexamples;
};

// Checks, over the explored region, that every successor of a well-typed
// state re-typechecks after stripping top-level warns or is an error verdict
// whose stay-membership is genuinely violated.
TheoremReport verify_subject_reduction(const Model& m, const Bounds& b,
                                       const RuntimeOptions& opts = {});
// Same, starting from an arbitrary state (the initial state must type).
TheoremReport verify_from_state(const RuntimeState& s0, const Bounds& b,
                                const RuntimeOptions& opts = {});

enum class GraphFormat { Json, Dot };

// Byte-stable serialization of the graph; unknown formats throw
// std::invalid_argument.
std::string export_graph(const StateGraph& g, GraphFormat format);
std::string export_graph(const StateGraph& g, const std::string& format);

std::string verdict_text(const ErrorVerdict& v);  // e.g. "merror(A+, b)"

}  // namespace bioamb

#endif  // BIOAMB_EXPLORER_HPP
