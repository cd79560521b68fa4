#include "bioamb/runtime.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "bioamb/parser.hpp"

namespace bioamb {

const char* rule_text(Rule r) {
  switch (r) {
    case Rule::RedIn: return "RedIn";
    case Rule::RedOut: return "RedOut";
    case Rule::RedMerge: return "RedMerge";
    case Rule::RedLocal: return "RedLocal";
    case Rule::RedParentOutput: return "RedParentOutput";
    case Rule::RedParentInput: return "RedParentInput";
    case Rule::RedSibling: return "RedSibling";
  }
  return "?";
}

std::string path_text(const TermPath& p) {
  if (p.empty()) return ".";
  std::string out;
  for (const auto& s : p) {
    if (!out.empty()) out += "/";
    switch (s.kind) {
      case PathStep::Kind::ParIdx: out += std::to_string(s.index); break;
      case PathStep::Kind::AmbBody: out += "b"; break;
      case PathStep::Kind::ReplCopy: out += "r" + std::to_string(s.index); break;
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

PathStep par_idx(int i) { return PathStep{PathStep::Kind::ParIdx, i}; }
PathStep amb_body() { return PathStep{PathStep::Kind::AmbBody, 0}; }
PathStep repl_copy(int j) { return PathStep{PathStep::Kind::ReplCopy, j}; }

// Deep-flattened component list of a parallel composition.
void flatten_into(const Process& p, std::vector<Process>& out) {
  if (p.is_zero()) return;
  if (const ParN* par = p.as_par()) {
    for (const auto& c : par->comps) flatten_into(c, out);
    return;
  }
  out.push_back(p);
}

std::vector<Process> flatten_comps(const Process& p) {
  std::vector<Process> out;
  flatten_into(p, out);
  return out;
}

// Opens every restriction reachable without crossing a prefix or a
// replication, renaming the bound name via `rename` and recording it.
Process open_restrictions(const Process& p,
                          const std::function<Name(const Name&, const ArgType&)>& rename) {
  if (const RestrictN* rn = p.as_restrict()) {
    Name fresh = rename(rn->name, rn->annot);
    Process body = fresh == rn->name ? rn->body : substitute(rn->body, rn->name, fresh);
    return open_restrictions(body, rename);
  }
  if (const ParN* par = p.as_par()) {
    std::vector<Process> comps;
    comps.reserve(par->comps.size());
    for (const auto& c : par->comps) comps.push_back(open_restrictions(c, rename));
    return make_process(ProcNode{ParN{std::move(comps)}});
  }
  if (const AmbientN* amb = p.as_ambient()) {
    return proc_ambient(amb->name, open_restrictions(amb->body, rename));
  }
  return p;
}

bool has_unguarded_restriction(const Process& p) {
  if (p.as_restrict()) return true;
  if (const ParN* par = p.as_par()) {
    for (const auto& c : par->comps)
      if (has_unguarded_restriction(c)) return true;
    return false;
  }
  if (const AmbientN* amb = p.as_ambient()) return has_unguarded_restriction(amb->body);
  return false;
}

GroupName group_of(const TypeEnv& env, const Name& ambient_name) {
  const ArgType* t = env.lookup(ambient_name);
  if (!t || !t->as_group())
    throw std::logic_error("ambient name without a group type: " + ambient_name.text);
  return *t->as_group();
}

}  // namespace

RuntimeState make_state(Process term, TypeEnv env, GroupTable groups) {
  Process canon = canonicalize(term);
  if (has_unguarded_restriction(canon)) {
    NameSet avoid = env.domain();
    NameSet present = all_names(canon);
    avoid.insert(present.begin(), present.end());
    canon = open_restrictions(canon, [&](const Name& n, const ArgType& t) {
      Name fresh = fresh_name(n, avoid);
      avoid.insert(fresh);
      env.extend(fresh, t);
      return fresh;
    });
    canon = canonicalize(canon);
  }
  return RuntimeState{std::move(canon), std::move(env), std::move(groups)};
}

std::string state_pretty(const RuntimeState& s) { return pretty(s.term); }

std::string state_hash(const RuntimeState& s) {
  std::string material = pretty(s.term);
  material += "\n";
  for (const auto& n : free_names(s.term)) {
    if (const ArgType* t = s.env.lookup(n)) {
      material += n.text + ":" + pretty_argtype(*t) + ";";
    }
  }
  std::uint64_t h = fnv1a64(material);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::vector<GroupName> top_level_warns(const RuntimeState& s) {
  std::vector<GroupName> out;
  for (const auto& c : flatten_comps(s.term)) {
    if (const WarnN* w = c.as_warn()) out.push_back(w->group);
  }
  return out;
}

TypingResult type_state(const RuntimeState& s) {
  std::vector<Process> rest;
  for (const auto& c : flatten_comps(s.term)) {
    if (c.as_warn()) continue;
    if (std::holds_alternative<ExErrorN>(c.node().v) ||
        std::holds_alternative<MergeErrorN>(c.node().v))
      throw std::invalid_argument("type_state applied to an error form");
    rest.push_back(c);
  }
  return type_process(s.env, s.groups, proc_par(std::move(rest)));
}

// ---------------------------------------------------------------------------
// Redex enumeration

namespace {

struct ViewEntry {
  Process proc;
  TermPath path;
};

// Virtual copies for enumeration use placeholder names (never valid
// identifiers) so a restriction-bound name can only match within its own
// copy; apply_redex re-derives real fresh names deterministically.
Process open_placeholder(const Process& p, int& counter) {
  return open_restrictions(p, [&](const Name& n, const ArgType&) {
    return Name{"\x01" + std::to_string(counter++), n.kind};
  });
}

void expand_entry(const Process& comp, const TermPath& path, int budget,
                  int& placeholder_counter, std::vector<ViewEntry>& out) {
  out.push_back({comp, path});
  // Replications contribute virtual copies, recursively: a replication
  // exposed inside another's copy unfolds within its own budget too.
  if (const ReplN* rn = comp.as_repl()) {
    for (int j = 1; j <= budget; ++j) {
      Process copy = open_placeholder(rn->body, placeholder_counter);
      auto sub = flatten_comps(copy);
      for (std::size_t k = 0; k < sub.size(); ++k) {
        TermPath q = path;
        q.push_back(repl_copy(j));
        q.push_back(par_idx(static_cast<int>(k)));
        expand_entry(sub[k], q, budget, placeholder_counter, out);
      }
    }
  }
}

std::vector<ViewEntry> region_view(const Process& region_node, const TermPath& base, int budget,
                                   int& placeholder_counter) {
  std::vector<ViewEntry> out;
  auto comps = flatten_comps(region_node);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    TermPath p = base;
    p.push_back(par_idx(static_cast<int>(i)));
    expand_entry(comps[i], p, budget, placeholder_counter, out);
  }
  return out;
}

// Replication copies used by a pair of paths must take the lowest ordinals:
// a lone participant sits in copy 1, two participants of one replication in
// copies 1 and 1 (same copy) or 1 and 2, in participant order. Anything else
// is a symmetric duplicate of an already-enumerated redex.
bool valid_copy_ordinals(const TermPath& a, const TermPath& b) {
  std::map<TermPath, std::vector<int>> per_repl;
  auto scan = [&](const TermPath& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].kind == PathStep::Kind::ReplCopy) {
        TermPath prefix(p.begin(), p.begin() + i);
        per_repl[prefix].push_back(p[i].index);
      }
    }
  };
  scan(a);
  scan(b);
  for (const auto& [prefix, ords] : per_repl) {
    if (ords.size() == 1) {
      if (ords[0] != 1) return false;
    } else {
      if (ords[0] != 1 || (ords[1] != 1 && ords[1] != 2)) return false;
    }
  }
  return true;
}

int count_unfoldings(const TermPath& a, const TermPath& b) {
  std::set<std::pair<TermPath, int>> copies;
  auto scan = [&](const TermPath& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].kind == PathStep::Kind::ReplCopy) {
        copies.emplace(TermPath(p.begin(), p.begin() + i), p[i].index);
      }
    }
  };
  scan(a);
  scan(b);
  return static_cast<int>(copies.size());
}

struct CommBranch {
  int branch;
  Direction dir;
  bool output;
  Name channel;
};

struct CapBranch {
  int branch;
  CapOp op;
  Name name;
};

std::vector<CommBranch> comm_branches(const SumN* sum) {
  std::vector<CommBranch> out;
  if (sum->flavor != SumFlavor::Communication) return out;
  for (std::size_t i = 0; i < sum->branches.size(); ++i) {
    if (auto* op = std::get_if<OutputPrefix>(&sum->branches[i].prefix)) {
      out.push_back({static_cast<int>(i), op->dir, true, op->channel});
    } else if (auto* ip = std::get_if<InputPrefix>(&sum->branches[i].prefix)) {
      out.push_back({static_cast<int>(i), ip->dir, false, ip->channel});
    }
  }
  return out;
}

std::vector<CapBranch> cap_branches(const SumN* sum) {
  std::vector<CapBranch> out;
  if (sum->flavor != SumFlavor::Capability) return out;
  for (std::size_t i = 0; i < sum->branches.size(); ++i) {
    if (auto* cp = std::get_if<CapPrefix>(&sum->branches[i].prefix)) {
      out.push_back({static_cast<int>(i), cp->op, cp->name});
    }
  }
  return out;
}

struct Enumerator {
  int budget;
  int placeholder = 0;
  std::vector<Redex> out;

  void add(Rule rule, const TermPath& site, const TermPath& pa, int ba, const TermPath& pb,
           int bb, const Name& sync) {
    if (!valid_copy_ordinals(pa, pb)) return;
    Redex r;
    r.rule = rule;
    r.site = site;
    r.a = Participant{pa, ba};
    r.b = Participant{pb, bb};
    r.sync = sync.text.empty() || sync.text[0] == '\x01' ? Name{"(restricted)", sync.kind} : sync;
    r.repl_unfoldings = count_unfoldings(pa, pb);
    out.push_back(std::move(r));
  }

  void region(const Process& region_node, const TermPath& base,
              const std::optional<Name>& host) {
    auto view = region_view(region_node, base, budget, placeholder);

    struct AmbEntry {
      const AmbientN* amb;
      TermPath path;
      std::vector<ViewEntry> body;  // body-region view (sums only used)
    };
    struct SumEntry {
      const SumN* sum;
      TermPath path;
    };
    std::vector<AmbEntry> ambs;
    std::vector<SumEntry> sums;
    for (const auto& e : view) {
      if (const AmbientN* a = e.proc.as_ambient()) {
        TermPath body_base = e.path;
        body_base.push_back(amb_body());
        ambs.push_back(AmbEntry{a, e.path, region_view(a->body, body_base, budget, placeholder)});
      } else if (const SumN* s = e.proc.as_sum()) {
        sums.push_back(SumEntry{s, e.path});
      }
    }

    auto body_sums = [](const AmbEntry& ae) {
      std::vector<SumEntry> out;
      for (const auto& e : ae.body) {
        if (const SumN* s = e.proc.as_sum()) out.push_back(SumEntry{s, e.path});
      }
      return out;
    };

    // Communication between two sums in this region (Red Local).
    for (const auto& so : sums) {
      for (const auto& co : comm_branches(so.sum)) {
        if (!co.output || co.dir != Direction::Local) continue;
        for (const auto& si : sums) {
          if (si.path == so.path) continue;
          for (const auto& ci : comm_branches(si.sum)) {
            if (ci.output || ci.dir != Direction::Local || !(ci.channel == co.channel)) continue;
            add(Rule::RedLocal, base, so.path, co.branch, si.path, ci.branch, co.channel);
          }
        }
      }
    }

    for (const auto& ae : ambs) {
      auto inner_sums = body_sums(ae);

      // Parent-to-child output (parent emits p2c, child receives c2p).
      for (const auto& so : sums) {
        for (const auto& co : comm_branches(so.sum)) {
          if (!co.output || co.dir != Direction::P2C) continue;
          for (const auto& si : inner_sums) {
            for (const auto& ci : comm_branches(si.sum)) {
              if (ci.output || ci.dir != Direction::C2P || !(ci.channel == co.channel)) continue;
              add(Rule::RedParentOutput, base, so.path, co.branch, si.path, ci.branch,
                  co.channel);
            }
          }
        }
      }
      // Child-to-parent output (child emits c2p, parent receives p2c).
      for (const auto& so : inner_sums) {
        for (const auto& co : comm_branches(so.sum)) {
          if (!co.output || co.dir != Direction::C2P) continue;
          for (const auto& si : sums) {
            for (const auto& ci : comm_branches(si.sum)) {
              if (ci.output || ci.dir != Direction::P2C || !(ci.channel == co.channel)) continue;
              add(Rule::RedParentInput, base, so.path, co.branch, si.path, ci.branch, co.channel);
            }
          }
        }
      }
      // Exit/expel: the exiting child's exit pairs with an expel in this
      // region, provided the region is an ambient body.
      if (host) {
        for (const auto& so : inner_sums) {
          for (const auto& ce : cap_branches(so.sum)) {
            if (ce.op != CapOp::Exit) continue;
            for (const auto& si : sums) {
              for (const auto& cx : cap_branches(si.sum)) {
                if (cx.op != CapOp::Expel || !(cx.name == ce.name)) continue;
                add(Rule::RedOut, base, so.path, ce.branch, si.path, cx.branch, ce.name);
              }
            }
          }
        }
      }
    }

    // Sibling-ambient interactions.
    for (const auto& ea : ambs) {
      auto sums_a = body_sums(ea);
      for (const auto& eb : ambs) {
        if (ea.path == eb.path) continue;
        auto sums_b = body_sums(eb);
        for (const auto& sa : sums_a) {
          for (const auto& ca : cap_branches(sa.sum)) {
            if (ca.op == CapOp::Enter) {
              for (const auto& sb : sums_b) {
                for (const auto& cb : cap_branches(sb.sum)) {
                  if (cb.op == CapOp::Accept && cb.name == ca.name)
                    add(Rule::RedIn, base, sa.path, ca.branch, sb.path, cb.branch, ca.name);
                }
              }
            } else if (ca.op == CapOp::MergePlus) {
              for (const auto& sb : sums_b) {
                for (const auto& cb : cap_branches(sb.sum)) {
                  if (cb.op == CapOp::MergeMinus && cb.name == ca.name)
                    add(Rule::RedMerge, base, sa.path, ca.branch, sb.path, cb.branch, ca.name);
                }
              }
            }
          }
          for (const auto& ca : comm_branches(sa.sum)) {
            if (!ca.output || ca.dir != Direction::S2S) continue;
            for (const auto& sb : sums_b) {
              for (const auto& cb : comm_branches(sb.sum)) {
                if (!cb.output && cb.dir == Direction::S2S && cb.channel == ca.channel)
                  add(Rule::RedSibling, base, sa.path, ca.branch, sb.path, cb.branch, ca.channel);
              }
            }
          }
        }
      }
    }

    // Recurse into every ambient body (virtual copies included).
    for (const auto& ae : ambs) {
      TermPath body_base = ae.path;
      body_base.push_back(amb_body());
      region(ae.amb->body, body_base, ae.amb->name);
    }
  }
};

bool redex_less(const Redex& x, const Redex& y) {
  if (x.site != y.site) return x.site < y.site;
  if (x.rule != y.rule) return x.rule < y.rule;
  if (x.a.sum_path != y.a.sum_path) return x.a.sum_path < y.a.sum_path;
  if (x.a.branch != y.a.branch) return x.a.branch < y.a.branch;
  if (x.b.sum_path != y.b.sum_path) return x.b.sum_path < y.b.sum_path;
  return x.b.branch < y.b.branch;
}

}  // namespace

std::vector<Redex> enumerate_redexes(const RuntimeState& s, int repl_budget) {
  Enumerator e;
  e.budget = repl_budget;
  e.region(s.term, {}, std::nullopt);
  std::stable_sort(e.out.begin(), e.out.end(), redex_less);
  return e.out;
}

// ---------------------------------------------------------------------------
// Applying a redex

namespace {

using CompsFn = std::function<std::vector<Process>(const Process&)>;

// Replaces the node at `path` by fn(node), splicing the returned list into
// the surrounding parallel composition.
Process rewrite_at(const Process& node, const PathStep* steps, std::size_t len,
                   const CompsFn& fn) {
  if (len == 0) return proc_par(fn(node));
  const PathStep& s = steps[0];
  if (s.kind == PathStep::Kind::ParIdx) {
    auto comps = flatten_comps(node);
    auto idx = static_cast<std::size_t>(s.index);
    if (idx >= comps.size()) throw std::logic_error("redex path out of range");
    if (len == 1) {
      std::vector<Process> repl = fn(comps[idx]);
      comps.erase(comps.begin() + idx);
      comps.insert(comps.begin() + idx, repl.begin(), repl.end());
    } else {
      comps[idx] = rewrite_at(comps[idx], steps + 1, len - 1, fn);
    }
    return proc_par(std::move(comps));
  }
  if (s.kind == PathStep::Kind::AmbBody) {
    const AmbientN* amb = node.as_ambient();
    if (!amb) throw std::logic_error("redex path expects an ambient");
    return proc_ambient(amb->name, rewrite_at(amb->body, steps + 1, len - 1, fn));
  }
  throw std::logic_error("unmaterialized replication copy in redex path");
}

Process rewrite_at(const Process& root, const TermPath& path, const CompsFn& fn) {
  return rewrite_at(root, path.data(), path.size(), fn);
}

Process descend(Process node, const PathStep* steps, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    const PathStep& s = steps[i];
    if (s.kind == PathStep::Kind::ParIdx) {
      auto comps = flatten_comps(node);
      auto idx = static_cast<std::size_t>(s.index);
      if (idx >= comps.size()) throw std::logic_error("redex path out of range");
      node = comps[idx];
    } else if (s.kind == PathStep::Kind::AmbBody) {
      const AmbientN* amb = node.as_ambient();
      if (!amb) throw std::logic_error("redex path expects an ambient");
      node = amb->body;
    } else {
      throw std::logic_error("unmaterialized replication copy in redex path");
    }
  }
  return node;
}

// Materializes every replication copy referenced by the given paths,
// rewriting the paths in place to plain ParIdx/AmbBody form. Opened
// restriction names are drawn from `avoid` and recorded in `opened`.
Process materialize(Process term, std::vector<TermPath*> paths, NameSet& avoid,
                    std::vector<std::pair<Name, ArgType>>& opened) {
  for (;;) {
    // Earliest replication (lexicographically smallest prefix) still virtual.
    const TermPath* hit = nullptr;
    TermPath hit_prefix;
    for (const TermPath* p : paths) {
      for (std::size_t i = 0; i < p->size(); ++i) {
        if ((*p)[i].kind != PathStep::Kind::ReplCopy) continue;
        TermPath prefix(p->begin(), p->begin() + i);
        if (!hit || prefix < hit_prefix) {
          hit = p;
          hit_prefix = std::move(prefix);
        }
        break;  // only the first virtual step of each path matters this round
      }
    }
    if (!hit) return term;

    int max_ord = 0;
    for (const TermPath* p : paths) {
      if (p->size() > hit_prefix.size() &&
          std::equal(hit_prefix.begin(), hit_prefix.end(), p->begin()) &&
          (*p)[hit_prefix.size()].kind == PathStep::Kind::ReplCopy) {
        max_ord = std::max(max_ord, (*p)[hit_prefix.size()].index);
      }
    }

    Process repl_node = descend(term, hit_prefix.data(), hit_prefix.size());
    const ReplN* rn = repl_node.as_repl();
    if (!rn) throw std::logic_error("replication copy path does not target a replication");

    std::vector<std::vector<Process>> copies;
    for (int j = 1; j <= max_ord; ++j) {
      Process body = open_restrictions(rn->body, [&](const Name& n, const ArgType& t) {
        Name base = n;
        for (int k = 1; k < j; ++k) base.text += "'";
        Name fresh = fresh_name(base, avoid);
        avoid.insert(fresh);
        opened.emplace_back(fresh, t);
        return fresh;
      });
      copies.push_back(flatten_comps(body));
    }
    std::vector<std::size_t> offset(copies.size() + 1, 0);
    for (std::size_t j = 0; j < copies.size(); ++j)
      offset[j + 1] = offset[j] + copies[j].size();
    std::size_t total = offset.back();

    term = rewrite_at(term, hit_prefix, [&](const Process& target) {
      std::vector<Process> repl;
      for (auto& c : copies) repl.insert(repl.end(), c.begin(), c.end());
      repl.push_back(target);
      return repl;
    });

    int repl_at = hit_prefix.back().index;
    std::size_t cut = hit_prefix.size();  // index of the step after ...ParIdx(i)
    for (TermPath* p : paths) {
      if (p->size() < cut) continue;
      if (!std::equal(hit_prefix.begin(), hit_prefix.end() - 1, p->begin())) continue;
      const PathStep& at = (*p)[cut - 1];
      if (at.kind != PathStep::Kind::ParIdx) continue;
      if (at.index > repl_at) {
        (*p)[cut - 1].index += static_cast<int>(total);
      } else if (at.index == repl_at) {
        if (p->size() > cut && (*p)[cut].kind == PathStep::Kind::ReplCopy) {
          int j = (*p)[cut].index;
          int k = (*p)[cut + 1].index;  // ParIdx within the copy
          int new_idx = repl_at + static_cast<int>(offset[j - 1]) + k;
          TermPath rebuilt(p->begin(), p->begin() + cut - 1);
          rebuilt.push_back(par_idx(new_idx));
          rebuilt.insert(rebuilt.end(), p->begin() + cut + 2, p->end());
          *p = std::move(rebuilt);
        } else {
          (*p)[cut - 1].index += static_cast<int>(total);  // the replication itself
        }
      }
    }
  }
}

struct Selected {
  Prefix prefix;
  Process cont;
};

Selected select_branch(const Process& sum_node, int branch) {
  const SumN* sum = sum_node.as_sum();
  if (!sum || branch < 0 || static_cast<std::size_t>(branch) >= sum->branches.size())
    throw std::logic_error("redex participant does not address a sum branch");
  return Selected{sum->branches[branch].prefix, sum->branches[branch].cont};
}

// Participant suffix below the site: [ParIdx(i)] for a region sum, or
// [ParIdx(i), AmbBody, ParIdx(k)] for a sum one ambient deep.
struct Suffix {
  int comp;
  int inner;  // -1 when the participant is a region component
};

Suffix parse_suffix(const TermPath& full, std::size_t site_len) {
  if (full.size() == site_len + 1) {
    return Suffix{full[site_len].index, -1};
  }
  if (full.size() == site_len + 3 && full[site_len + 1].kind == PathStep::Kind::AmbBody) {
    return Suffix{full[site_len].index, full[site_len + 2].index};
  }
  throw std::logic_error("unexpected participant path shape");
}

Process rebuild_ambient(const AmbientN* amb, std::vector<Process> body) {
  return proc_ambient(amb->name, proc_par(std::move(body)));
}

}  // namespace

Outcome apply_redex(const RuntimeState& s, const Redex& r, const RuntimeOptions& opts) {
  NameSet avoid = s.env.domain();
  {
    NameSet present = all_names(s.term);
    avoid.insert(present.begin(), present.end());
  }
  std::vector<std::pair<Name, ArgType>> opened;
  TermPath site = r.site;
  TermPath pa = r.a.sum_path;
  TermPath pb = r.b.sum_path;
  Process term = materialize(s.term, {&site, &pa, &pb}, avoid, opened);

  TypeEnv env = s.env;
  for (const auto& [n, t] : opened) env.extend(n, t);

  std::optional<ErrorVerdict> verdict;
  std::optional<GroupName> emitted;
  bool redin_ok = true;
  Name sync = r.sync;

  auto finish = [&](Process next_term) -> Outcome {
    if (verdict) return *verdict;
    NextState ns{make_state(std::move(next_term), std::move(env), s.groups), emitted, redin_ok};
    return ns;
  };

  if (r.rule == Rule::RedOut) {
    // site = [... ParIdx(i) AmbBody]: the body of the parent ambient. The
    // rewrite replaces the parent ambient component itself.
    if (site.size() < 2) throw std::logic_error("RedOut without an enclosing ambient");
    TermPath parent_path(site.begin(), site.end() - 1);
    // Ambients crossed on the way to the parent; the second-to-last (if any)
    // resolves the warn.
    std::vector<Name> crossed;
    for (std::size_t i = 0; i < site.size(); ++i) {
      if (site[i].kind == PathStep::Kind::AmbBody) {
        Process n = descend(term, site.data(), i);
        crossed.push_back(n.as_ambient()->name);
      }
    }
    Suffix child_sfx = parse_suffix(pa, site.size());
    Suffix expel_sfx = parse_suffix(pb, site.size());
    if (child_sfx.inner < 0 || expel_sfx.inner >= 0)
      throw std::logic_error("malformed RedOut participants");

    Process out = rewrite_at(term, parent_path, [&](const Process& parent_node) {
      const AmbientN* parent = parent_node.as_ambient();
      auto body = flatten_comps(parent->body);
      const AmbientN* child = body[child_sfx.comp].as_ambient();
      auto child_body = flatten_comps(child->body);
      Selected exit_sel = select_branch(child_body[child_sfx.inner], r.a.branch);
      sync = std::get<CapPrefix>(exit_sel.prefix).name;
      child_body[child_sfx.inner] = exit_sel.cont;
      Process child_out = rebuild_ambient(child, std::move(child_body));

      Selected expel_sel = select_branch(body[expel_sfx.comp], r.b.branch);
      body[expel_sfx.comp] = expel_sel.cont;
      body.erase(body.begin() + child_sfx.comp);
      Process parent_out = rebuild_ambient(parent, std::move(body));

      GroupName g_child = group_of(env, child->name);
      std::vector<Process> repl{std::move(child_out), std::move(parent_out)};
      if (crossed.size() >= 2) {
        GroupName g_host = group_of(env, crossed[crossed.size() - 2]);
        if (!member_group(g_host, s.groups.lookup(g_child).stay)) {
          verdict = ErrorVerdict{ErrorVerdict::Kind::Exit, g_host, g_child};
        }
        // warn absorbed on success
      } else {
        repl.push_back(proc_warn(g_child));
        emitted = g_child;
      }
      return repl;
    });
    return finish(std::move(out));
  }

  Process out = rewrite_at(term, site, [&](const Process& site_node) {
    auto comps = flatten_comps(site_node);
    Suffix sa = parse_suffix(pa, site.size());
    Suffix sb = parse_suffix(pb, site.size());

    auto inner_select = [&](const Suffix& sfx, int branch) {
      const AmbientN* amb = comps[sfx.comp].as_ambient();
      auto body = flatten_comps(amb->body);
      Selected sel = select_branch(body[sfx.inner], branch);
      return std::tuple<const AmbientN*, std::vector<Process>, Selected>(amb, std::move(body),
                                                                         std::move(sel));
    };

    switch (r.rule) {
      case Rule::RedLocal: {
        Selected osel = select_branch(comps[sa.comp], r.a.branch);
        Selected isel = select_branch(comps[sb.comp], r.b.branch);
        const auto& op = std::get<OutputPrefix>(osel.prefix);
        const auto& ip = std::get<InputPrefix>(isel.prefix);
        sync = op.channel;
        comps[sa.comp] = osel.cont;
        comps[sb.comp] = substitute(isel.cont, ip.binder, op.payload);
        return comps;
      }
      case Rule::RedParentOutput: {
        Selected osel = select_branch(comps[sa.comp], r.a.branch);
        auto [amb, body, isel] = inner_select(sb, r.b.branch);
        const auto& op = std::get<OutputPrefix>(osel.prefix);
        const auto& ip = std::get<InputPrefix>(isel.prefix);
        sync = op.channel;
        comps[sa.comp] = osel.cont;
        body[sb.inner] = substitute(isel.cont, ip.binder, op.payload);
        comps[sb.comp] = rebuild_ambient(amb, std::move(body));
        return comps;
      }
      case Rule::RedParentInput: {
        auto [amb, body, osel] = inner_select(sa, r.a.branch);
        Selected isel = select_branch(comps[sb.comp], r.b.branch);
        const auto& op = std::get<OutputPrefix>(osel.prefix);
        const auto& ip = std::get<InputPrefix>(isel.prefix);
        sync = op.channel;
        body[sa.inner] = osel.cont;
        comps[sa.comp] = rebuild_ambient(amb, std::move(body));
        comps[sb.comp] = substitute(isel.cont, ip.binder, op.payload);
        return comps;
      }
      case Rule::RedSibling: {
        auto [amb_a, body_a, osel] = inner_select(sa, r.a.branch);
        auto [amb_b, body_b, isel] = inner_select(sb, r.b.branch);
        const auto& op = std::get<OutputPrefix>(osel.prefix);
        const auto& ip = std::get<InputPrefix>(isel.prefix);
        sync = op.channel;
        body_a[sa.inner] = osel.cont;
        body_b[sb.inner] = substitute(isel.cont, ip.binder, op.payload);
        comps[sa.comp] = rebuild_ambient(amb_a, std::move(body_a));
        comps[sb.comp] = rebuild_ambient(amb_b, std::move(body_b));
        return comps;
      }
      case Rule::RedIn: {
        auto [amb_a, body_a, esel] = inner_select(sa, r.a.branch);
        auto [amb_b, body_b, asel] = inner_select(sb, r.b.branch);
        sync = std::get<CapPrefix>(esel.prefix).name;
        body_a[sa.inner] = esel.cont;
        Process mover = rebuild_ambient(amb_a, std::move(body_a));
        GroupName g_mover = group_of(env, amb_a->name);
        GroupName g_host = group_of(env, amb_b->name);
        redin_ok = member_group(g_host, s.groups.lookup(g_mover).stay);
        body_b[sb.inner] = asel.cont;
        body_b.push_back(std::move(mover));
        Process host = rebuild_ambient(amb_b, std::move(body_b));
        std::vector<Process> repl;
        for (std::size_t i = 0; i < comps.size(); ++i) {
          if (static_cast<int>(i) == sa.comp) continue;
          repl.push_back(static_cast<int>(i) == sb.comp ? host : comps[i]);
        }
        return repl;
      }
      case Rule::RedMerge: {
        auto [amb_a, body_a, psel] = inner_select(sa, r.a.branch);
        auto [amb_b, body_b, msel] = inner_select(sb, r.b.branch);
        sync = std::get<CapPrefix>(psel.prefix).name;
        GroupName g_recv = group_of(env, amb_a->name);
        Process incoming_cont = msel.cont;  // R of the rule
        std::vector<Process> incoming_ctx;  // S of the rule
        for (std::size_t i = 0; i < body_b.size(); ++i) {
          if (static_cast<int>(i) != sb.inner) incoming_ctx.push_back(body_b[i]);
        }
        auto type_groups = [&](const Process& p) {
          auto res = type_process(env, s.groups, p);
          if (auto* err = std::get_if<TypeError>(&res))
            throw std::logic_error("merge premise failed to type: " + err->to_string());
          return std::get<Judgment>(res).groups;
        };
        GroupSet incoming = type_groups(incoming_cont);
        GroupSet ctx_groups = type_groups(proc_par(incoming_ctx));
        incoming.insert(ctx_groups.begin(), ctx_groups.end());
        for (const auto& gi : incoming) {
          if (!member_group(g_recv, s.groups.lookup(gi).stay)) {
            verdict = ErrorVerdict{ErrorVerdict::Kind::Merge, g_recv, gi};
            return comps;
          }
        }
        body_a[sa.inner] = psel.cont;
        body_a.push_back(std::move(incoming_cont));
        for (auto& c : incoming_ctx) body_a.push_back(std::move(c));
        Process merged = rebuild_ambient(amb_a, std::move(body_a));
        if (opts.strict_merge) {
          auto res = type_process(env, s.groups, merged);
          if (auto* err = std::get_if<TypeError>(&res)) {
            GroupName offender = err->kind == TypeErrorKind::StayViolation
                                     ? GroupName{err->context}
                                     : group_of(env, amb_b->name);
            verdict = ErrorVerdict{ErrorVerdict::Kind::Merge, g_recv, offender};
            return comps;
          }
        }
        std::vector<Process> repl;
        for (std::size_t i = 0; i < comps.size(); ++i) {
          if (static_cast<int>(i) == sb.comp) continue;
          repl.push_back(static_cast<int>(i) == sa.comp ? merged : comps[i]);
        }
        return repl;
      }
      default:
        throw std::logic_error("unhandled rule");
    }
  });
  (void)sync;
  return finish(std::move(out));
}

std::vector<Successor> successors(const RuntimeState& s, int repl_budget,
                                  const RuntimeOptions& opts) {
  std::vector<Successor> out;
  for (const auto& r : enumerate_redexes(s, repl_budget)) {
    out.push_back(Successor{r, apply_redex(s, r, opts)});
  }
  return out;
}

}  // namespace bioamb
