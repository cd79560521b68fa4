#include "bioamb/explorer.hpp"

#include <deque>
#include <sstream>

#include "json.hpp"

namespace bioamb {

namespace {

std::string verdict_key(const ErrorVerdict& v) {
  return std::string(v.kind == ErrorVerdict::Kind::Exit ? "exit" : "merge") + "|" + v.host.text +
         "|" + v.offender.text;
}

}  // namespace

std::string verdict_text(const ErrorVerdict& v) {
  return std::string(v.kind == ErrorVerdict::Kind::Exit ? "exerror" : "merror") + "(" +
         v.host.text + ", " + v.offender.text + ")";
}

ModelTypeError::ModelTypeError(CheckReport report)
    : std::runtime_error("model fails type checking (" +
                         std::to_string(report.errors.size()) + " finding(s))"),
      report_(std::move(report)) {}

RuntimeState initial_state(const Model& m) { return make_state(m.system, m.env, m.groups); }

StateGraph explore(const Model& m, const Bounds& b, const RuntimeOptions& opts) {
  CheckReport report = check_model(m);
  if (!report.ok) throw ModelTypeError(std::move(report));

  StateGraph g;
  g.bounds = b;
  RuntimeState init = initial_state(m);
  g.initial = state_hash(init);

  struct QueueItem {
    std::string hash;
    std::vector<WitnessStep> trail;
  };
  std::deque<QueueItem> frontier;
  std::set<std::string> reported_errors;

  auto add_state = [&](RuntimeState&& s, int depth, std::vector<WitnessStep> trail,
                       const std::string& hash) -> bool {
    if (g.states.count(hash)) return true;
    if (static_cast<int>(g.states.size()) >= b.max_states) {
      g.truncated = true;
      return false;
    }
    StateRecord rec;
    rec.pretty = state_pretty(s);
    rec.depth = depth;
    rec.warns = top_level_warns(s);
    rec.typed = std::holds_alternative<Judgment>(type_state(s));
    rec.state = std::move(s);
    g.states.emplace(hash, std::move(rec));
    frontier.push_back(QueueItem{hash, std::move(trail)});
    return true;
  };

  add_state(std::move(init), 0, {}, g.initial);

  while (!frontier.empty()) {
    QueueItem item = std::move(frontier.front());
    frontier.pop_front();
    const StateRecord& rec = g.states.at(item.hash);
    int depth = rec.depth;
    RuntimeState state = rec.state;  // copy: g.states may rehash while expanding

    if (depth >= b.max_depth) {
      if (!enumerate_redexes(state, b.repl_budget).empty()) g.truncated = true;
      continue;
    }
    auto succ = successors(state, b.repl_budget, opts);
    int index = -1;
    for (auto& [redex, outcome] : succ) {
      ++index;
      EdgeRecord edge;
      edge.from = item.hash;
      edge.redex_index = index;
      edge.rule = redex.rule;
      edge.sync = redex.sync.text;
      edge.site = path_text(redex.site);
      if (auto* err = std::get_if<ErrorVerdict>(&outcome)) {
        edge.error = *err;
        g.edges.push_back(std::move(edge));
        std::string key = verdict_key(*err);
        if (reported_errors.insert(key).second) {
          ErrorRecord er;
          er.verdict = *err;
          er.witness = item.trail;
          er.witness.push_back(WitnessStep{index, redex.rule, redex.sync.text});
          g.errors.push_back(std::move(er));
        }
        continue;
      }
      auto& next = std::get<NextState>(outcome);
      std::string hash = state_hash(next.state);
      edge.to = hash;
      edge.emitted_warn = next.emitted_warn;
      std::vector<WitnessStep> trail = item.trail;
      trail.push_back(WitnessStep{index, redex.rule, redex.sync.text});
      if (add_state(std::move(next.state), depth + 1, std::move(trail), hash)) {
        g.edges.push_back(std::move(edge));
      }
    }
  }
  return g;
}

TheoremReport verify_from_state(const RuntimeState& s0, const Bounds& b,
                                const RuntimeOptions& opts) {
  TheoremReport report;
  std::map<std::string, int> seen;  // hash -> depth
  std::deque<std::pair<RuntimeState, int>> frontier;

  std::string h0 = state_hash(s0);
  seen.emplace(h0, 0);
  frontier.emplace_back(s0, 0);
  {
    auto t0 = type_state(s0);
    if (auto* err = std::get_if<TypeError>(&t0)) {
      report.status = TheoremReport::Status::Fail;
      report.counterexamples.push_back(
          Counterexample{h0, state_pretty(s0), std::nullopt,
                         "initial state fails to type: " + err->to_string()});
      return report;
    }
  }

  while (!frontier.empty()) {
    auto [state, depth] = std::move(frontier.front());
    frontier.pop_front();
    ++report.states_checked;
    if (depth >= b.max_depth) {
      report.status = report.status == TheoremReport::Status::Fail
                          ? report.status
                          : TheoremReport::Status::TruncatedPass;
      continue;
    }
    int index = -1;
    for (auto& [redex, outcome] : successors(state, b.repl_budget, opts)) {
      ++index;
      ++report.transitions_checked;
      WitnessStep step{index, redex.rule, redex.sync.text};
      if (auto* err = std::get_if<ErrorVerdict>(&outcome)) {
        ++report.errors_reached;
        // The verdict must witness a genuine stay violation.
        const GroupDecl& decl = state.groups.lookup(err->offender);
        if (member_group(err->host, decl.stay)) {
          report.status = TheoremReport::Status::Fail;
          report.counterexamples.push_back(Counterexample{
              state_hash(state), state_pretty(state), step,
              "error verdict " + verdict_text(*err) + " without a stay violation"});
        }
        continue;
      }
      auto& next = std::get<NextState>(outcome);
      auto typed = type_state(next.state);
      if (auto* terr = std::get_if<TypeError>(&typed)) {
        report.status = TheoremReport::Status::Fail;
        report.counterexamples.push_back(
            Counterexample{state_hash(state), state_pretty(state), step,
                           "successor fails to type: " + terr->to_string() +
                               "; successor: " + state_pretty(next.state)});
        continue;
      }
      std::string hash = state_hash(next.state);
      if (seen.emplace(hash, depth + 1).second) {
        if (static_cast<int>(seen.size()) > b.max_states) {
          report.status = report.status == TheoremReport::Status::Fail
                              ? report.status
                              : TheoremReport::Status::TruncatedPass;
          continue;
        }
        frontier.emplace_back(std::move(next.state), depth + 1);
      }
    }
  }
  return report;
}

TheoremReport verify_subject_reduction(const Model& m, const Bounds& b,
                                       const RuntimeOptions& opts) {
  CheckReport report = check_model(m);
  if (!report.ok) throw ModelTypeError(std::move(report));
  return verify_from_state(initial_state(m), b, opts);
}

// ---------------------------------------------------------------------------
// Export

namespace {

nlohmann::json verdict_json(const ErrorVerdict& v) {
  nlohmann::json j;
  j["error"] = v.kind == ErrorVerdict::Kind::Exit ? "exit" : "merge";
  j["host"] = v.host.text;
  j["offender"] = v.offender.text;
  return j;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_graph(const StateGraph& g, GraphFormat format) {
  if (format == GraphFormat::Json) {
    nlohmann::json j;
    j["initial"] = g.initial;
    j["states"] = nlohmann::json::object();
    for (const auto& [hash, rec] : g.states) {
      nlohmann::json s;
      s["pretty"] = rec.pretty;
      s["depth"] = rec.depth;
      s["typed"] = rec.typed;
      s["warns"] = nlohmann::json::array();
      for (const auto& w : rec.warns) s["warns"].push_back(w.text);
      j["states"][hash] = s;
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges) {
      nlohmann::json je;
      je["from"] = e.from;
      je["redex_index"] = e.redex_index;
      je["rule"] = rule_text(e.rule);
      je["sync"] = e.sync;
      je["site"] = e.site;
      if (e.to) je["to"] = *e.to;
      if (e.error) je["error"] = verdict_json(*e.error);
      if (e.emitted_warn) je["emitted_warn"] = e.emitted_warn->text;
      j["edges"].push_back(je);
    }
    j["errors"] = nlohmann::json::array();
    for (const auto& er : g.errors) {
      nlohmann::json je;
      je["kind"] = er.verdict.kind == ErrorVerdict::Kind::Exit ? "exit" : "merge";
      je["host"] = er.verdict.host.text;
      je["offender"] = er.verdict.offender.text;
      je["witness"] = nlohmann::json::array();
      for (const auto& w : er.witness) {
        nlohmann::json jw;
        jw["redex_index"] = w.redex_index;
        jw["rule"] = rule_text(w.rule);
        jw["sync"] = w.sync;
        je["witness"].push_back(jw);
      }
      j["errors"].push_back(je);
    }
    j["truncated"] = g.truncated;
    j["bounds"] = {{"max_depth", g.bounds.max_depth},
                   {"max_states", g.bounds.max_states},
                   {"repl_budget", g.bounds.repl_budget}};
    return j.dump(2) + "\n";
  }

  // DOT: states as nodes, error verdicts as double-circled nodes.
  std::ostringstream os;
  os << "digraph states {\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto& [hash, rec] : g.states) {
    os << "  \"" << hash << "\" [label=\"" << dot_escape(rec.pretty) << "\"";
    if (hash == g.initial) os << ", penwidth=2";
    os << "];\n";
  }
  std::map<std::string, std::string> error_nodes;  // key -> node id
  for (const auto& e : g.edges) {
    if (e.error) {
      std::string key = verdict_key(*e.error);
      if (!error_nodes.count(key)) {
        std::string id = "err" + std::to_string(error_nodes.size());
        error_nodes.emplace(key, id);
        os << "  \"" << id << "\" [label=\"" << dot_escape(verdict_text(*e.error))
           << "\", shape=doublecircle];\n";
      }
    }
  }
  for (const auto& e : g.edges) {
    std::string target = e.to ? *e.to : error_nodes.at(verdict_key(*e.error));
    os << "  \"" << e.from << "\" -> \"" << target << "\" [label=\"" << rule_text(e.rule) << " "
       << dot_escape(e.sync) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string export_graph(const StateGraph& g, const std::string& format) {
  if (format == "json") return export_graph(g, GraphFormat::Json);
  if (format == "dot") return export_graph(g, GraphFormat::Dot);
  throw std::invalid_argument("unknown graph format: " + format);
}

}  // namespace bioamb
