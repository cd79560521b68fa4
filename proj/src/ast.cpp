#include "bioamb/ast.hpp"

#include <stdexcept>

namespace bioamb {

// ---------------------------------------------------------------------------
// GroupTable

bool GroupTable::declare(GroupDecl decl) {
  if (decl.name.is_univ() || index_.count(decl.name.text)) return false;
  index_.emplace(decl.name.text, decls_.size());
  decls_.push_back(std::move(decl));
  return true;
}

bool GroupTable::declared(const GroupName& g) const {
  return g.is_univ() || index_.count(g.text) > 0;
}

const GroupDecl& GroupTable::lookup(const GroupName& g) const {
  if (g.is_univ()) {
    static const GroupDecl univ{univ_group(), {univ_group()}, {univ_group()}};
    return univ;
  }
  auto it = index_.find(g.text);
  if (it == index_.end()) throw std::out_of_range("unknown group: " + g.text);
  return decls_[it->second];
}

// ---------------------------------------------------------------------------
// Types

const char* label_text(Label l) {
  switch (l) {
    case Label::EA: return "ea";
    case Label::EE: return "ee";
    case Label::MM: return "mm";
  }
  return "?";
}

bool operator==(const CapType& a, const CapType& b) {
  return a.label == b.label && a.movers == b.movers && a.hosts == b.hosts;
}

bool operator<(const CapType& a, const CapType& b) {
  if (a.label != b.label) return a.label < b.label;
  if (a.movers != b.movers) return a.movers < b.movers;
  return a.hosts < b.hosts;
}

NameKind ArgType::name_kind() const {
  if (as_group()) return NameKind::Ambient;
  if (as_cap()) return NameKind::Capability;
  return NameKind::Channel;
}

bool operator==(const ArgType& a, const ArgType& b) {
  if (a.rep_.index() != b.rep_.index()) return false;
  if (auto* g = a.as_group()) return *g == *b.as_group();
  if (auto* y = a.as_cap()) return *y == *b.as_cap();
  return *a.as_chan()->payload == *b.as_chan()->payload;
}

bool operator<(const ArgType& a, const ArgType& b) {
  if (a.rep_.index() != b.rep_.index()) return a.rep_.index() < b.rep_.index();
  if (auto* g = a.as_group()) return *g < *b.as_group();
  if (auto* y = a.as_cap()) return *y < *b.as_cap();
  return *a.as_chan()->payload < *b.as_chan()->payload;
}

// ---------------------------------------------------------------------------
// Prefixes

const char* direction_text(Direction d) {
  switch (d) {
    case Direction::Local: return "local";
    case Direction::S2S: return "s2s";
    case Direction::P2C: return "p2c";
    case Direction::C2P: return "c2p";
  }
  return "?";
}

const char* cap_op_text(CapOp op) {
  switch (op) {
    case CapOp::Enter: return "enter";
    case CapOp::Accept: return "accept";
    case CapOp::Exit: return "exit";
    case CapOp::Expel: return "expel";
    case CapOp::MergePlus: return "merge+";
    case CapOp::MergeMinus: return "merge-";
  }
  return "?";
}

Label cap_op_label(CapOp op) {
  switch (op) {
    case CapOp::Enter:
    case CapOp::Accept: return Label::EA;
    case CapOp::Exit:
    case CapOp::Expel: return Label::EE;
    case CapOp::MergePlus:
    case CapOp::MergeMinus: return Label::MM;
  }
  return Label::EA;
}

bool operator==(const Prefix& a, const Prefix& b) {
  if (a.index() != b.index()) return false;
  if (auto* ca = std::get_if<CapPrefix>(&a)) {
    auto* cb = std::get_if<CapPrefix>(&b);
    return ca->op == cb->op && ca->name == cb->name;
  }
  if (auto* oa = std::get_if<OutputPrefix>(&a)) {
    auto* ob = std::get_if<OutputPrefix>(&b);
    return oa->dir == ob->dir && oa->channel == ob->channel && oa->payload == ob->payload;
  }
  auto* ia = std::get_if<InputPrefix>(&a);
  auto* ib = std::get_if<InputPrefix>(&b);
  return ia->dir == ib->dir && ia->channel == ib->channel && ia->binder == ib->binder;
}

SumFlavor prefix_flavor(const Prefix& p) {
  return std::holds_alternative<CapPrefix>(p) ? SumFlavor::Capability
                                              : SumFlavor::Communication;
}

// ---------------------------------------------------------------------------
// Process construction

Process make_process(ProcNode n) {
  return Process(std::make_shared<const ProcNode>(std::move(n)));
}

Process::Process() {
  static const std::shared_ptr<const ProcNode> zero =
      std::make_shared<const ProcNode>(ProcNode{ZeroN{}});
  node_ = zero;
}

Process proc_zero() { return Process(); }

Process proc_restrict(Name n, ArgType annot, Process body) {
  return make_process(ProcNode{RestrictN{std::move(n), std::move(annot), std::move(body)}});
}

Process proc_par(std::vector<Process> comps) {
  if (comps.empty()) return proc_zero();
  if (comps.size() == 1) return comps.front();
  return make_process(ProcNode{ParN{std::move(comps)}});
}

Process proc_repl(Process body) { return make_process(ProcNode{ReplN{std::move(body)}}); }

Process proc_ambient(Name a, Process body) {
  return make_process(ProcNode{AmbientN{std::move(a), std::move(body)}});
}

Process proc_sum(std::vector<Branch> branches) {
  if (branches.empty()) throw std::invalid_argument("sum needs at least one branch");
  SumFlavor flavor = prefix_flavor(branches.front().prefix);
  for (const auto& b : branches) {
    if (prefix_flavor(b.prefix) != flavor)
      throw std::invalid_argument("sum mixes capability and communication branches");
  }
  return make_process(ProcNode{SumN{std::move(branches), flavor}});
}

Process proc_prefix(Prefix p, Process cont) {
  std::vector<Branch> bs;
  bs.push_back(Branch{std::move(p), std::move(cont)});
  return proc_sum(std::move(bs));
}

Process proc_warn(GroupName g) { return make_process(ProcNode{WarnN{std::move(g)}}); }

Process proc_exerror(GroupName host, GroupName mover) {
  return make_process(ProcNode{ExErrorN{std::move(host), std::move(mover)}});
}

Process proc_merror(GroupName host, GroupName content) {
  return make_process(ProcNode{MergeErrorN{std::move(host), std::move(content)}});
}

// ---------------------------------------------------------------------------
// Structural equality

bool operator==(const Process& a, const Process& b) {
  if (a.node_ == b.node_) return true;
  const auto& va = a.node_->v;
  const auto& vb = b.node_->v;
  if (va.index() != vb.index()) return false;
  if (std::holds_alternative<ZeroN>(va)) return true;
  if (auto* r = std::get_if<RestrictN>(&va)) {
    auto* s = std::get_if<RestrictN>(&vb);
    return r->name == s->name && r->annot == s->annot && r->body == s->body;
  }
  if (auto* p = std::get_if<ParN>(&va)) {
    auto* q = std::get_if<ParN>(&vb);
    if (p->comps.size() != q->comps.size()) return false;
    for (std::size_t i = 0; i < p->comps.size(); ++i)
      if (!(p->comps[i] == q->comps[i])) return false;
    return true;
  }
  if (auto* r = std::get_if<ReplN>(&va)) return r->body == std::get_if<ReplN>(&vb)->body;
  if (auto* m = std::get_if<AmbientN>(&va)) {
    auto* n = std::get_if<AmbientN>(&vb);
    return m->name == n->name && m->body == n->body;
  }
  if (auto* s = std::get_if<SumN>(&va)) {
    auto* t = std::get_if<SumN>(&vb);
    if (s->flavor != t->flavor || s->branches.size() != t->branches.size()) return false;
    for (std::size_t i = 0; i < s->branches.size(); ++i) {
      if (s->branches[i].prefix != t->branches[i].prefix) return false;
      if (!(s->branches[i].cont == t->branches[i].cont)) return false;
    }
    return true;
  }
  if (auto* w = std::get_if<WarnN>(&va)) return w->group == std::get_if<WarnN>(&vb)->group;
  if (auto* e = std::get_if<ExErrorN>(&va)) {
    auto* f = std::get_if<ExErrorN>(&vb);
    return e->host == f->host && e->mover == f->mover;
  }
  auto* e = std::get_if<MergeErrorN>(&va);
  auto* f = std::get_if<MergeErrorN>(&vb);
  return e->host == f->host && e->content == f->content;
}

// ---------------------------------------------------------------------------
// Free names / all names

namespace {

void collect_free(const Process& p, NameSet& bound, NameSet& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ZeroN> || std::is_same_v<T, WarnN> ||
                      std::is_same_v<T, ExErrorN> || std::is_same_v<T, MergeErrorN>) {
          // no names
        } else if constexpr (std::is_same_v<T, RestrictN>) {
          bool inserted = bound.insert(n.name).second;
          collect_free(n.body, bound, out);
          if (inserted) bound.erase(n.name);
        } else if constexpr (std::is_same_v<T, ParN>) {
          for (const auto& c : n.comps) collect_free(c, bound, out);
        } else if constexpr (std::is_same_v<T, ReplN>) {
          collect_free(n.body, bound, out);
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          if (!bound.count(n.name)) out.insert(n.name);
          collect_free(n.body, bound, out);
        } else if constexpr (std::is_same_v<T, SumN>) {
          for (const auto& b : n.branches) {
            if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
              if (!bound.count(cp->name)) out.insert(cp->name);
              collect_free(b.cont, bound, out);
            } else if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
              if (!bound.count(op->channel)) out.insert(op->channel);
              if (!bound.count(op->payload)) out.insert(op->payload);
              collect_free(b.cont, bound, out);
            } else {
              auto* ip = std::get_if<InputPrefix>(&b.prefix);
              if (!bound.count(ip->channel)) out.insert(ip->channel);
              bool inserted = bound.insert(ip->binder).second;
              collect_free(b.cont, bound, out);
              if (inserted) bound.erase(ip->binder);
            }
          }
        }
      },
      p.node().v);
}

void collect_all(const Process& p, NameSet& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RestrictN>) {
          out.insert(n.name);
          collect_all(n.body, out);
        } else if constexpr (std::is_same_v<T, ParN>) {
          for (const auto& c : n.comps) collect_all(c, out);
        } else if constexpr (std::is_same_v<T, ReplN>) {
          collect_all(n.body, out);
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          out.insert(n.name);
          collect_all(n.body, out);
        } else if constexpr (std::is_same_v<T, SumN>) {
          for (const auto& b : n.branches) {
            if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
              out.insert(cp->name);
            } else if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
              out.insert(op->channel);
              out.insert(op->payload);
            } else {
              auto* ip = std::get_if<InputPrefix>(&b.prefix);
              out.insert(ip->channel);
              out.insert(ip->binder);
            }
            collect_all(b.cont, out);
          }
        }
      },
      p.node().v);
}

}  // namespace

NameSet free_names(const Process& p) {
  NameSet bound, out;
  collect_free(p, bound, out);
  return out;
}

NameSet all_names(const Process& p) {
  NameSet out;
  collect_all(p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Substitution

Name fresh_name(const Name& hint, const NameSet& avoid) {
  if (!avoid.count(hint)) return hint;
  for (unsigned long i = 1;; ++i) {
    Name cand{hint.text + std::to_string(i), hint.kind};
    if (!avoid.count(cand)) return cand;
  }
}

namespace {

Name subst_name(const Name& n, const Name& target, const Name& replacement) {
  return n == target ? replacement : n;
}

Process subst(const Process& p, const Name& target, const Name& replacement);

// Renames a binder out of the way when it would capture `replacement`, then
// substitutes in the body. Returns the (binder, body) to use.
std::pair<Name, Process> enter_binder(const Name& binder, const Process& body,
                                      const Name& target, const Name& replacement) {
  if (binder == replacement) {
    NameSet avoid = free_names(body);
    avoid.insert(target);
    avoid.insert(replacement);
    Name fresh = fresh_name(binder, avoid);
    Process renamed = substitute(body, binder, fresh);
    return {fresh, subst(renamed, target, replacement)};
  }
  return {binder, subst(body, target, replacement)};
}

Process subst(const Process& p, const Name& target, const Name& replacement) {
  if (!free_names(p).count(target)) return p;
  return std::visit(
      [&](const auto& n) -> Process {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ZeroN> || std::is_same_v<T, WarnN> ||
                      std::is_same_v<T, ExErrorN> || std::is_same_v<T, MergeErrorN>) {
          return p;
        } else if constexpr (std::is_same_v<T, RestrictN>) {
          if (n.name == target) return p;  // shadowed
          auto [binder, body] = enter_binder(n.name, n.body, target, replacement);
          return proc_restrict(binder, n.annot, body);
        } else if constexpr (std::is_same_v<T, ParN>) {
          std::vector<Process> comps;
          comps.reserve(n.comps.size());
          for (const auto& c : n.comps) comps.push_back(subst(c, target, replacement));
          return make_process(ProcNode{ParN{std::move(comps)}});
        } else if constexpr (std::is_same_v<T, ReplN>) {
          return proc_repl(subst(n.body, target, replacement));
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          return proc_ambient(subst_name(n.name, target, replacement),
                              subst(n.body, target, replacement));
        } else {
          std::vector<Branch> branches;
          branches.reserve(n.branches.size());
          for (const auto& b : n.branches) {
            if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
              branches.push_back(Branch{CapPrefix{cp->op, subst_name(cp->name, target, replacement)},
                                        subst(b.cont, target, replacement)});
            } else if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
              branches.push_back(
                  Branch{OutputPrefix{op->dir, subst_name(op->channel, target, replacement),
                                      subst_name(op->payload, target, replacement)},
                         subst(b.cont, target, replacement)});
            } else {
              auto* ip = std::get_if<InputPrefix>(&b.prefix);
              Name channel = subst_name(ip->channel, target, replacement);
              if (ip->binder == target) {
                branches.push_back(Branch{InputPrefix{ip->dir, channel, ip->binder}, b.cont});
              } else {
                auto [binder, cont] = enter_binder(ip->binder, b.cont, target, replacement);
                branches.push_back(Branch{InputPrefix{ip->dir, channel, binder}, cont});
              }
            }
          }
          return make_process(ProcNode{SumN{std::move(branches), n.flavor}});
        }
      },
      p.node().v);
}

}  // namespace

Process substitute(const Process& p, const Name& target, const Name& replacement) {
  if (target == replacement) return p;
  return subst(p, target, replacement);
}

// ---------------------------------------------------------------------------
// Audits

bool audit_sum_flavors(const Process& p) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RestrictN>) {
          return audit_sum_flavors(n.body);
        } else if constexpr (std::is_same_v<T, ParN>) {
          for (const auto& c : n.comps)
            if (!audit_sum_flavors(c)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, ReplN>) {
          return audit_sum_flavors(n.body);
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          return audit_sum_flavors(n.body);
        } else if constexpr (std::is_same_v<T, SumN>) {
          if (n.branches.empty()) return false;
          for (const auto& b : n.branches) {
            if (prefix_flavor(b.prefix) != n.flavor) return false;
            if (!audit_sum_flavors(b.cont)) return false;
          }
          return true;
        } else {
          return true;
        }
      },
      p.node().v);
}

bool has_runtime_forms(const Process& p) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, WarnN> || std::is_same_v<T, ExErrorN> ||
                      std::is_same_v<T, MergeErrorN>) {
          return true;
        } else if constexpr (std::is_same_v<T, RestrictN>) {
          return has_runtime_forms(n.body);
        } else if constexpr (std::is_same_v<T, ParN>) {
          for (const auto& c : n.comps)
            if (has_runtime_forms(c)) return true;
          return false;
        } else if constexpr (std::is_same_v<T, ReplN>) {
          return has_runtime_forms(n.body);
        } else if constexpr (std::is_same_v<T, AmbientN>) {
          return has_runtime_forms(n.body);
        } else if constexpr (std::is_same_v<T, SumN>) {
          for (const auto& b : n.branches)
            if (has_runtime_forms(b.cont)) return true;
          return false;
        } else {
          return false;
        }
      },
      p.node().v);
}

}  // namespace bioamb
