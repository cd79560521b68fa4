// Command-line driver: check, step, run, explore and verify over .ba models.
//
// Exit codes: 0 success; 1 type error; 2 an error state was produced or is
// reachable; 3 parse error; 4 usage error.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bioamb/explorer.hpp"
#include "bioamb/parser.hpp"
#include "bioamb/runtime.hpp"
#include "bioamb/typing.hpp"

namespace {

using namespace bioamb;

constexpr int kExitOk = 0;
constexpr int kExitTypeError = 1;
constexpr int kExitErrorState = 2;
constexpr int kExitParseError = 3;
constexpr int kExitUsage = 4;

struct CliConfig {
  std::string file;
  int depth = 32;
  int max_states = 10000;
  int repl_budget = 1;
  int max_steps = 100;
  unsigned long long seed = 0;
  bool json = false;
  bool strict_merge = false;
  std::string dot_out;
  std::string json_out;
  int apply = -1;
  bool interactive = false;
};

bool read_file(const std::string& path, std::string& out, std::string& err) {
  std::ifstream f(path);
  if (!f) {
    err = "cannot open " + path;
    return false;
  }
  std::ostringstream os;
  os << f.rdbuf();
  out = os.str();
  return true;
}

int load_model(const CliConfig& cfg, Model& m) {
  std::string source, err;
  if (!read_file(cfg.file, source, err)) {
    std::cerr << "error: " << err << "\n";
    return kExitUsage;
  }
  auto res = parse_model(source);
  if (auto* perr = std::get_if<ParseError>(&res)) {
    if (cfg.json) {
      nlohmann::json j;
      j["status"] = "parse_error";
      j["line"] = perr->line;
      j["column"] = perr->column;
      j["kind"] = parse_error_kind_text(perr->kind);
      j["message"] = perr->message;
      std::cout << j.dump(2) << "\n";
    }
    std::cerr << cfg.file << ":" << perr->to_string() << "\n";
    return kExitParseError;
  }
  m = std::get<Model>(std::move(res));
  return kExitOk;
}

void print_report(const CheckReport& rep, bool json) {
  if (json) {
    std::cout << rep.to_json() << "\n";
    return;
  }
  if (rep.ok) {
    std::string groups;
    for (const auto& g : rep.judgment.groups) {
      if (!groups.empty()) groups += ", ";
      groups += g.text;
    }
    std::cout << "groups: " << groups << "\n";
    if (!rep.judgment.caps.empty()) {
      std::string caps;
      for (const auto& y : rep.judgment.caps) {
        if (!caps.empty()) caps += ", ";
        caps += cap_type_text(y);
      }
      std::cout << "caps: " << caps << "\n";
    }
  } else {
    for (const auto& e : rep.errors) std::cerr << "type error: " << e.to_string() << "\n";
  }
}

int check_or_fail(const CliConfig& cfg, const Model& m, CheckReport& rep) {
  rep = check_model(m);
  if (!rep.ok) {
    print_report(rep, cfg.json);
    return kExitTypeError;
  }
  return kExitOk;
}

int cmd_check(const CliConfig& cfg) {
  Model m;
  if (int rc = load_model(cfg, m)) return rc;
  CheckReport rep = check_model(m);
  print_report(rep, cfg.json);
  return rep.ok ? kExitOk : kExitTypeError;
}

nlohmann::json redex_json(const Redex& r, int index) {
  nlohmann::json j;
  j["index"] = index;
  j["rule"] = rule_text(r.rule);
  j["sync"] = r.sync.text;
  j["site"] = path_text(r.site);
  j["repl_unfoldings"] = r.repl_unfoldings;
  return j;
}

nlohmann::json verdict_json(const ErrorVerdict& v) {
  nlohmann::json j;
  j["error"] = v.kind == ErrorVerdict::Kind::Exit ? "exit" : "merge";
  j["host"] = v.host.text;
  j["offender"] = v.offender.text;
  return j;
}

void print_redexes(const std::vector<Redex>& redexes) {
  if (redexes.empty()) {
    std::cout << "no redexes (quiescent)\n";
    return;
  }
  for (std::size_t i = 0; i < redexes.size(); ++i) {
    const Redex& r = redexes[i];
    std::cout << "[" << i << "] " << rule_text(r.rule) << " on " << r.sync.text << " at "
              << path_text(r.site);
    if (r.repl_unfoldings) std::cout << " (unfolds " << r.repl_unfoldings << ")";
    std::cout << "\n";
  }
}

// Applies redex `index` to `state`; prints the outcome. Returns the exit
// code, advancing `state` in place on a Next outcome.
int apply_and_print(RuntimeState& state, const std::vector<Redex>& redexes, int index,
                    const CliConfig& cfg, int step_no) {
  if (index < 0 || static_cast<std::size_t>(index) >= redexes.size()) {
    std::cerr << "error: redex index " << index << " out of range\n";
    return kExitUsage;
  }
  const Redex& r = redexes[index];
  Outcome o = apply_redex(state, r, RuntimeOptions{cfg.strict_merge});
  if (auto* err = std::get_if<ErrorVerdict>(&o)) {
    if (cfg.json) {
      nlohmann::json j = verdict_json(*err);
      j["step"] = step_no;
      j["rule"] = rule_text(r.rule);
      j["sync"] = r.sync.text;
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "step " << step_no << ": " << rule_text(r.rule) << " " << r.sync.text
                << " -> " << verdict_text(*err) << "\n";
    }
    return kExitErrorState;
  }
  auto& next = std::get<NextState>(o);
  if (cfg.json) {
    nlohmann::json j;
    j["step"] = step_no;
    j["rule"] = rule_text(r.rule);
    j["sync"] = r.sync.text;
    j["site"] = path_text(r.site);
    if (next.emitted_warn) j["emitted_warn"] = next.emitted_warn->text;
    j["state_pretty"] = state_pretty(next.state);
    j["state_hash"] = state_hash(next.state);
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "step " << step_no << ": " << rule_text(r.rule) << " " << r.sync.text;
    if (next.emitted_warn) std::cout << " (warn " << next.emitted_warn->text << ")";
    std::cout << " -> " << state_pretty(next.state) << "\n";
  }
  state = std::move(next.state);
  return kExitOk;
}

int cmd_step(const CliConfig& cfg) {
  Model m;
  if (int rc = load_model(cfg, m)) return rc;
  CheckReport rep;
  if (int rc = check_or_fail(cfg, m, rep)) return rc;
  RuntimeState state = initial_state(m);

  if (cfg.interactive) {
    int step_no = 1;
    for (;;) {
      std::cout << "state: " << state_pretty(state) << "\n";
      auto redexes = enumerate_redexes(state, cfg.repl_budget);
      if (redexes.empty()) {
        std::cout << "no redexes (quiescent)\n";
        return kExitOk;
      }
      print_redexes(redexes);
      std::cout << "redex> " << std::flush;
      std::string line;
      if (!std::getline(std::cin, line)) return kExitOk;
      if (line == "q" || line == "quit") return kExitOk;
      int index = -1;
      try {
        index = std::stoi(line);
      } catch (...) {
        std::cout << "enter a redex index or q\n";
        continue;
      }
      int rc = apply_and_print(state, redexes, index, cfg, step_no);
      if (rc == kExitErrorState) return rc;
      if (rc == kExitOk) ++step_no;
    }
  }

  auto redexes = enumerate_redexes(state, cfg.repl_budget);
  if (cfg.apply >= 0) {
    return apply_and_print(state, redexes, cfg.apply, cfg, 1);
  }
  if (cfg.json) {
    nlohmann::json j;
    j["state_pretty"] = state_pretty(state);
    j["state_hash"] = state_hash(state);
    j["redexes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < redexes.size(); ++i)
      j["redexes"].push_back(redex_json(redexes[i], static_cast<int>(i)));
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "state: " << state_pretty(state) << "\n";
    print_redexes(redexes);
  }
  return kExitOk;
}

int cmd_run(const CliConfig& cfg) {
  Model m;
  if (int rc = load_model(cfg, m)) return rc;
  CheckReport rep;
  if (int rc = check_or_fail(cfg, m, rep)) return rc;
  RuntimeState state = initial_state(m);
  std::mt19937_64 gen(cfg.seed);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    auto redexes = enumerate_redexes(state, cfg.repl_budget);
    if (redexes.empty()) {
      std::cout << "quiescent after " << (step - 1) << " step(s)\n";
      return kExitOk;
    }
    int index = static_cast<int>(gen() % redexes.size());
    int rc = apply_and_print(state, redexes, index, cfg, step);
    if (rc != kExitOk) return rc;
  }
  std::cout << "stopped after " << cfg.max_steps << " step(s)\n";
  return kExitOk;
}

int write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) {
    std::cerr << "error: cannot write " << path << "\n";
    return kExitUsage;
  }
  f << content;
  return kExitOk;
}

int cmd_explore(const CliConfig& cfg) {
  Model m;
  if (int rc = load_model(cfg, m)) return rc;
  CheckReport rep;
  if (int rc = check_or_fail(cfg, m, rep)) return rc;
  StateGraph g = explore(m, Bounds{cfg.depth, cfg.max_states, cfg.repl_budget},
                         RuntimeOptions{cfg.strict_merge});
  if (!cfg.dot_out.empty()) {
    if (int rc = write_file(cfg.dot_out, export_graph(g, GraphFormat::Dot))) return rc;
  }
  if (!cfg.json_out.empty()) {
    if (int rc = write_file(cfg.json_out, export_graph(g, GraphFormat::Json))) return rc;
  }
  if (cfg.json) {
    std::cout << export_graph(g, GraphFormat::Json);
  } else {
    std::cout << g.states.size() << " state(s), " << g.edges.size() << " edge(s), "
              << g.errors.size() << " error verdict(s)" << (g.truncated ? ", truncated" : "")
              << "\n";
    for (const auto& er : g.errors) {
      std::cout << "reachable error: " << verdict_text(er.verdict) << " in "
                << er.witness.size() << " step(s)\n";
    }
  }
  return g.errors.empty() ? kExitOk : kExitErrorState;
}

int cmd_verify(const CliConfig& cfg) {
  Model m;
  if (int rc = load_model(cfg, m)) return rc;
  CheckReport rep;
  if (int rc = check_or_fail(cfg, m, rep)) return rc;
  TheoremReport tr = verify_subject_reduction(m, Bounds{cfg.depth, cfg.max_states, cfg.repl_budget},
                                              RuntimeOptions{cfg.strict_merge});
  const char* status = tr.status == TheoremReport::Status::Pass ? "pass"
                       : tr.status == TheoremReport::Status::TruncatedPass ? "truncated-pass"
                                                                           : "fail";
  if (cfg.json) {
    nlohmann::json j;
    j["status"] = status;
    j["states_checked"] = tr.states_checked;
    j["transitions_checked"] = tr.transitions_checked;
    j["errors_reached"] = tr.errors_reached;
    j["counterexamples"] = nlohmann::json::array();
    for (const auto& c : tr.counterexamples) {
      nlohmann::json jc;
      jc["state_hash"] = c.state_hash;
      jc["state_pretty"] = c.state_pretty;
      jc["detail"] = c.detail;
      j["counterexamples"].push_back(jc);
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "subject reduction: " << status << " (" << tr.states_checked << " state(s), "
              << tr.transitions_checked << " transition(s), " << tr.errors_reached
              << " error outcome(s))\n";
    for (const auto& c : tr.counterexamples)
      std::cout << "counterexample: " << c.detail << "\n  at " << c.state_pretty << "\n";
  }
  return tr.counterexamples.empty() ? kExitOk : kExitTypeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BioAmbients modelling toolkit with group types"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", cfg.file, "model file (.ba)")->required();
    cmd->add_flag("--json", cfg.json, "machine-readable output");
    cmd->add_flag("--strict-merge", cfg.strict_merge,
                  "re-type the full merged body on merges");
  };

  CLI::App* check = app.add_subcommand("check", "parse and type-check a model");
  add_common(check);

  CLI::App* step = app.add_subcommand("step", "list redexes of the initial state");
  add_common(step);
  step->add_option("--apply", cfg.apply, "apply the redex with this index");
  step->add_flag("--interactive", cfg.interactive, "choose redexes from stdin");
  step->add_option("--repl-budget", cfg.repl_budget, "replication unfoldings per step");

  CLI::App* run = app.add_subcommand("run", "run with seeded random redex choice");
  add_common(run);
  run->add_option("--seed", cfg.seed, "random seed (default 0)");
  run->add_option("--max-steps", cfg.max_steps, "maximum number of steps");
  run->add_option("--repl-budget", cfg.repl_budget, "replication unfoldings per step");

  CLI::App* explore = app.add_subcommand("explore", "bounded breadth-first state space search");
  add_common(explore);
  explore->add_option("--depth", cfg.depth, "maximum BFS depth");
  explore->add_option("--max-states", cfg.max_states, "maximum number of states");
  explore->add_option("--repl-budget", cfg.repl_budget, "replication unfoldings per step");
  explore->add_option("--dot", cfg.dot_out, "write the graph in DOT format");
  explore->add_option("--json-out", cfg.json_out, "write the graph as JSON");

  CLI::App* verify = app.add_subcommand("verify", "check subject reduction over the explored region");
  add_common(verify);
  verify->add_option("--depth", cfg.depth, "maximum BFS depth");
  verify->add_option("--max-states", cfg.max_states, "maximum number of states");
  verify->add_option("--repl-budget", cfg.repl_budget, "replication unfoldings per step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(cfg);
    if (step->parsed()) return cmd_step(cfg);
    if (run->parsed()) return cmd_run(cfg);
    if (explore->parsed()) return cmd_explore(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
  } catch (const ModelTypeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTypeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
