#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "bioamb/parser.hpp"
#include "bioamb/runtime.hpp"

// Canonicalization. Normal form construction works bottom-up:
//
//   1. structural pass: flatten parallel compositions, drop nil components
//      and !0, remove dead restrictions, push live restrictions maximally
//      inward (through parallel and ambient boundaries), order restriction
//      chains canonically;
//   2. ordering: parallel components sort by an alpha-invariant shape key in
//      which bound names render by binder position, not by text;
//   3. renaming: every binder is renamed to v1, v2, ... in traversal order,
//      skipping indices that collide with the term's free names.
//
// Sort keys mask names bound above the component being keyed, so the final
// renaming never perturbs an already-sorted order; a second run is the
// identity.

namespace bioamb {
namespace {

using StrSet = std::set<std::string>;

// ---------------------------------------------------------------------------
// Shape keys

struct KeyCtx {
  std::vector<std::string> local;  // binders inside the render root, innermost last
  const StrSet* outer;             // binders above the render root
  std::map<std::string, int> outer_ord;
  int next_ord = 1;
};

void key_name(const Name& n, KeyCtx& ctx, std::string& out) {
  for (std::size_t i = ctx.local.size(); i-- > 0;) {
    if (ctx.local[i] == n.text) {
      out += "?" + std::to_string(ctx.local.size() - 1 - i) + ";";
      return;
    }
  }
  if (ctx.outer && ctx.outer->count(n.text)) {
    auto [it, inserted] = ctx.outer_ord.emplace(n.text, ctx.next_ord);
    if (inserted) ++ctx.next_ord;
    out += "^" + std::to_string(it->second) + ";";
    return;
  }
  out += "n:" + n.text + ";";
}

void key_process(const Process& p, KeyCtx& ctx, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ZeroN>) {
          out += "0";
        } else if constexpr (std::is_same_v<T, WarnN>) {
          out += "w(" + n.group.text + ")";
        } else if constexpr (std::is_same_v<T, ExErrorN>) {
          out += "xe(" + n.host.text + "," + n.mover.text + ")";
        } else if constexpr (std::is_same_v<T, MergeErrorN>) {
          out += "me(" + n.host.text + "," + n.content.text + ")";
        } else if constexpr (std::is_same_v<T, ParN>) {
          out += "P(";
          for (const auto& c : n.comps) {
            key_process(c, ctx, out);
            out += ",";
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, ReplN>) {
          out += "R(";
          key_process(n.body, ctx, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          out += "A(";
          key_name(n.name, ctx, out);
          key_process(n.body, ctx, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, RestrictN>) {
          out += "N(" + pretty_typeexpr(n.annot) + ",";
          ctx.local.push_back(n.name.text);
          key_process(n.body, ctx, out);
          ctx.local.pop_back();
          out += ")";
        } else {  // SumN
          out += n.flavor == SumFlavor::Capability ? "Sc(" : "Sm(";
          for (const auto& b : n.branches) {
            if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
              out += cap_op_text(cp->op);
              out += " ";
              key_name(cp->name, ctx, out);
              key_process(b.cont, ctx, out);
            } else if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
              out += "o";
              out += direction_text(op->dir);
              key_name(op->channel, ctx, out);
              key_name(op->payload, ctx, out);
              key_process(b.cont, ctx, out);
            } else {
              auto* ip = std::get_if<InputPrefix>(&b.prefix);
              out += "i";
              out += direction_text(ip->dir);
              key_name(ip->channel, ctx, out);
              ctx.local.push_back(ip->binder.text);
              key_process(b.cont, ctx, out);
              ctx.local.pop_back();
            }
            out += "+";
          }
          out += ")";
        }
      },
      p.node().v);
}

std::string shape_key(const Process& p, const StrSet& outer_bound) {
  KeyCtx ctx;
  ctx.outer = &outer_bound;
  std::string out;
  key_process(p, ctx, out);
  return out;
}

// ---------------------------------------------------------------------------
// Occurrence paths (for ordering restriction chains)

// Paths of free occurrences of `target` in p, as child-index sequences;
// occurrences bound by an inner binder of the same text are skipped.
void occ_paths(const Process& p, const std::string& target, std::vector<int>& here,
               std::vector<std::vector<int>>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RestrictN>) {
          if (n.name.text == target) return;  // shadowed
          here.push_back(0);
          occ_paths(n.body, target, here, out);
          here.pop_back();
        } else if constexpr (std::is_same_v<T, ParN>) {
          for (std::size_t i = 0; i < n.comps.size(); ++i) {
            here.push_back(static_cast<int>(i));
            occ_paths(n.comps[i], target, here, out);
            here.pop_back();
          }
        } else if constexpr (std::is_same_v<T, ReplN>) {
          here.push_back(0);
          occ_paths(n.body, target, here, out);
          here.pop_back();
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          if (n.name.text == target) {
            here.push_back(-1);
            out.push_back(here);
            here.pop_back();
          }
          here.push_back(0);
          occ_paths(n.body, target, here, out);
          here.pop_back();
        } else if constexpr (std::is_same_v<T, SumN>) {
          for (std::size_t i = 0; i < n.branches.size(); ++i) {
            const auto& b = n.branches[i];
            int base = static_cast<int>(i) * 4;
            auto hit = [&](int slot) {
              here.push_back(base + slot);
              out.push_back(here);
              here.pop_back();
            };
            bool binds_target = false;
            if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
              if (cp->name.text == target) hit(1);
            } else if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
              if (op->channel.text == target) hit(1);
              if (op->payload.text == target) hit(2);
            } else {
              auto* ip = std::get_if<InputPrefix>(&b.prefix);
              if (ip->channel.text == target) hit(1);
              binds_target = ip->binder.text == target;
            }
            if (!binds_target) {
              here.push_back(base);
              occ_paths(b.cont, target, here, out);
              here.pop_back();
            }
          }
        }
      },
      p.node().v);
}

std::vector<std::vector<int>> occurrence_paths(const Process& p, const std::string& target) {
  std::vector<int> here;
  std::vector<std::vector<int>> out;
  occ_paths(p, target, here, out);
  return out;
}

// ---------------------------------------------------------------------------
// Structural pass

bool name_free_in(const Process& p, const Name& n) { return free_names(p).count(n) > 0; }

Process push_restrict(const Name& n, const ArgType& t, const Process& body,
                      const StrSet& outer_bound);

// Orders a (already fully pushed) chain of restrictions canonically by
// (annotation, occurrence paths of the binder in the chain's base).
Process chain_normalize(const Process& r) {
  std::vector<const RestrictN*> chain;
  Process base = r;
  while (const RestrictN* rn = base.as_restrict()) {
    chain.push_back(rn);
    base = rn->body;
  }
  if (chain.size() <= 1) return r;
  struct Entry {
    std::string type_key;
    std::vector<std::vector<int>> occs;
    const RestrictN* node;
  };
  std::vector<Entry> entries;
  entries.reserve(chain.size());
  for (const RestrictN* rn : chain) {
    entries.push_back(
        Entry{pretty_typeexpr(rn->annot), occurrence_paths(base, rn->name.text), rn});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.type_key != y.type_key) return x.type_key < y.type_key;
    return x.occs < y.occs;
  });
  Process out = base;
  for (std::size_t i = entries.size(); i-- > 0;) {
    out = proc_restrict(entries[i].node->name, entries[i].node->annot, out);
  }
  return out;
}

Process sorted_par(std::vector<Process> comps, const StrSet& outer_bound) {
  std::stable_sort(comps.begin(), comps.end(), [&](const Process& x, const Process& y) {
    return shape_key(x, outer_bound) < shape_key(y, outer_bound);
  });
  return proc_par(std::move(comps));
}

Process push_restrict(const Name& n, const ArgType& t, const Process& body,
                      const StrSet& outer_bound) {
  if (const ParN* par = body.as_par()) {
    std::vector<Process> users, others;
    for (const auto& c : par->comps) {
      (name_free_in(c, n) ? users : others).push_back(c);
    }
    if (!others.empty()) {
      Process inner = push_restrict(n, t, proc_par(std::move(users)), outer_bound);
      others.push_back(std::move(inner));
      return sorted_par(std::move(others), outer_bound);
    }
    return chain_normalize(proc_restrict(n, t, body));
  }
  if (const AmbientN* amb = body.as_ambient()) {
    if (amb->name.text != n.text)
      return proc_ambient(amb->name, push_restrict(n, t, amb->body, outer_bound));
    return proc_restrict(n, t, body);
  }
  if (const RestrictN* rn = body.as_restrict()) {
    StrSet inner_bound = outer_bound;
    inner_bound.insert(rn->name.text);
    Process pushed = push_restrict(n, t, rn->body, inner_bound);
    return chain_normalize(proc_restrict(rn->name, rn->annot, pushed));
  }
  return proc_restrict(n, t, body);
}

Process norm(const Process& p, const StrSet& outer_bound) {
  return std::visit(
      [&](const auto& n) -> Process {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ZeroN> || std::is_same_v<T, WarnN> ||
                      std::is_same_v<T, ExErrorN> || std::is_same_v<T, MergeErrorN>) {
          return p;
        } else if constexpr (std::is_same_v<T, ReplN>) {
          Process b = norm(n.body, outer_bound);
          if (b.is_zero()) return proc_zero();
          return proc_repl(std::move(b));
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          return proc_ambient(n.name, norm(n.body, outer_bound));
        } else if constexpr (std::is_same_v<T, SumN>) {
          std::vector<Branch> branches;
          branches.reserve(n.branches.size());
          for (const auto& b : n.branches) {
            StrSet inner = outer_bound;
            if (auto* ip = std::get_if<InputPrefix>(&b.prefix)) inner.insert(ip->binder.text);
            branches.push_back(Branch{b.prefix, norm(b.cont, inner)});
          }
          return proc_sum(std::move(branches));
        } else if constexpr (std::is_same_v<T, ParN>) {
          std::vector<Process> comps;
          for (const auto& c : n.comps) {
            Process nc = norm(c, outer_bound);
            if (nc.is_zero()) continue;
            if (const ParN* inner = nc.as_par()) {
              for (const auto& ic : inner->comps) comps.push_back(ic);
            } else {
              comps.push_back(std::move(nc));
            }
          }
          return sorted_par(std::move(comps), outer_bound);
        } else {  // RestrictN
          StrSet inner = outer_bound;
          inner.insert(n.name.text);
          Process b = norm(n.body, inner);
          if (!name_free_in(b, n.name)) return b;
          return push_restrict(n.name, n.annot, b, outer_bound);
        }
      },
      p.node().v);
}

// ---------------------------------------------------------------------------
// Canonical binder renaming

struct Renamer {
  StrSet taken;  // free names of the whole term
  int counter = 1;

  Name next_binder(NameKind kind) {
    for (;;) {
      std::string cand = "v" + std::to_string(counter++);
      if (!taken.count(cand)) return Name{cand, kind};
    }
  }

  Name map_name(const Name& n, const std::map<std::string, std::string>& env) const {
    auto it = env.find(n.text);
    return it == env.end() ? n : Name{it->second, n.kind};
  }

  Process rec(const Process& p, const std::map<std::string, std::string>& env) {
    return std::visit(
        [&](const auto& n) -> Process {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ZeroN> || std::is_same_v<T, WarnN> ||
                        std::is_same_v<T, ExErrorN> || std::is_same_v<T, MergeErrorN>) {
            return p;
          } else if constexpr (std::is_same_v<T, RestrictN>) {
            Name fresh = next_binder(n.name.kind);
            auto inner = env;
            inner[n.name.text] = fresh.text;
            return proc_restrict(fresh, n.annot, rec(n.body, inner));
          } else if constexpr (std::is_same_v<T, ParN>) {
            std::vector<Process> comps;
            comps.reserve(n.comps.size());
            for (const auto& c : n.comps) comps.push_back(rec(c, env));
            return proc_par(std::move(comps));
          } else if constexpr (std::is_same_v<T, ReplN>) {
            return proc_repl(rec(n.body, env));
          } else if constexpr (std::is_same_v<T, AmbientN>) {
            return proc_ambient(map_name(n.name, env), rec(n.body, env));
          } else {  // SumN
            std::vector<Branch> branches;
            branches.reserve(n.branches.size());
            for (const auto& b : n.branches) {
              if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
                branches.push_back(
                    Branch{CapPrefix{cp->op, map_name(cp->name, env)}, rec(b.cont, env)});
              } else if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
                branches.push_back(Branch{OutputPrefix{op->dir, map_name(op->channel, env),
                                                       map_name(op->payload, env)},
                                          rec(b.cont, env)});
              } else {
                auto* ip = std::get_if<InputPrefix>(&b.prefix);
                Name fresh = next_binder(ip->binder.kind);
                auto inner = env;
                inner[ip->binder.text] = fresh.text;
                branches.push_back(Branch{InputPrefix{ip->dir, map_name(ip->channel, env), fresh},
                                          rec(b.cont, inner)});
              }
            }
            return proc_sum(std::move(branches));
          }
        },
        p.node().v);
  }
};

}  // namespace

Process canonicalize(const Process& p) {
  Process normed = norm(p, {});
  Renamer renamer;
  for (const auto& n : free_names(normed)) renamer.taken.insert(n.text);
  return renamer.rec(normed, {});
}

}  // namespace bioamb
