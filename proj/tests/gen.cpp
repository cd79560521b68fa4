#include "gen.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "bioamb/typing.hpp"

namespace bioamb::testgen {

namespace {

int pick(Rng& rng, int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

bool chance(Rng& rng, double p) { return (rng() % 1000) < static_cast<unsigned long>(p * 1000); }

template <typename T>
const T& pick_of(Rng& rng, const std::vector<T>& xs) {
  return xs[pick(rng, static_cast<int>(xs.size()))];
}

}  // namespace

std::string fixture_path(const std::string& name) {
  return std::string(BIOAMB_FIXTURES_DIR) + "/" + name;
}

std::string read_fixture(const std::string& name) {
  std::ifstream f(fixture_path(name));
  if (!f) throw std::runtime_error("missing fixture " + name);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

Model load_fixture(const std::string& name) {
  auto res = parse_model(read_fixture(name));
  if (auto* err = std::get_if<ParseError>(&res))
    throw std::runtime_error(name + ": " + err->to_string());
  return std::get<Model>(std::move(res));
}

// ---------------------------------------------------------------------------
// Random syntactic models

namespace {

struct SyntaxGen {
  Rng& rng;
  Model m;
  std::vector<GroupName> groups;
  std::vector<Name> ambients, caps, chans;
  int fresh = 0;
  int budget = 24;

  GroupSet random_group_set() {
    GroupSet out;
    out.insert(pick_of(rng, groups));
    while (chance(rng, 0.4)) out.insert(pick_of(rng, groups));
    if (chance(rng, 0.3)) out.insert(univ_group());
    return out;
  }

  CapType random_cap_type() {
    Label l = static_cast<Label>(pick(rng, 3));
    return CapType{random_group_set(), random_group_set(), l};
  }

  ArgType random_argtype(int depth) {
    int c = pick(rng, depth > 0 ? 3 : 2);
    if (c == 0) return ArgType::group(pick_of(rng, groups));
    if (c == 1) return ArgType::cap(random_cap_type());
    return ArgType::chan(random_argtype(depth - 1));
  }

  ArgType random_typeexpr(int depth) {
    // restriction/declaration position: amb | cap | ch
    int c = pick(rng, 3);
    if (c == 0) return ArgType::group(pick_of(rng, groups));
    if (c == 1) return ArgType::cap(random_cap_type());
    return ArgType::chan(random_argtype(depth));
  }

  void declare_groups() {
    int k = 1 + pick(rng, 3);
    for (int i = 0; i < k; ++i) groups.push_back(GroupName{"G" + std::to_string(i + 1)});
    for (const auto& g : groups) {
      GroupSet stay = random_group_set();
      stay.insert(univ_group());
      GroupSet cross;
      for (const auto& s : stay)
        if (chance(rng, 0.7)) cross.insert(s);
      if (cross.empty()) cross = stay;
      m.groups.declare(GroupDecl{g, stay, cross});
    }
  }

  void declare_names() {
    int na = 2 + pick(rng, 2);
    for (int i = 0; i < na; ++i) {
      Name n{"am" + std::to_string(i), NameKind::Ambient};
      m.env.extend(n, ArgType::group(pick_of(rng, groups)));
      ambients.push_back(n);
    }
    int nc = 1 + pick(rng, 2);
    for (int i = 0; i < nc; ++i) {
      Name n{"cp" + std::to_string(i), NameKind::Capability};
      m.env.extend(n, ArgType::cap(random_cap_type()));
      caps.push_back(n);
    }
    int nh = 1 + pick(rng, 2);
    for (int i = 0; i < nh; ++i) {
      Name n{"ch" + std::to_string(i), NameKind::Channel};
      m.env.extend(n, ArgType::chan(random_argtype(1)));
      chans.push_back(n);
    }
  }

  Name any_name() {
    int c = pick(rng, 3);
    if (c == 0) return pick_of(rng, ambients);
    if (c == 1) return pick_of(rng, caps);
    return pick_of(rng, chans);
  }

  Prefix random_prefix(SumFlavor flavor, std::vector<Name>& binders_out) {
    if (flavor == SumFlavor::Capability) {
      CapOp op = static_cast<CapOp>(pick(rng, 6));
      return CapPrefix{op, pick_of(rng, caps)};
    }
    Direction dir = static_cast<Direction>(pick(rng, 4));
    Name channel = pick_of(rng, chans);
    if (chance(rng, 0.5)) {
      return OutputPrefix{dir, channel, any_name()};
    }
    Name binder{"w" + std::to_string(fresh++), NameKind::Channel};
    binders_out.push_back(binder);
    return InputPrefix{dir, channel, binder};
  }

  Process proc(int depth) {
    if (budget <= 0 || depth <= 0 || chance(rng, 0.2)) return proc_zero();
    --budget;
    switch (pick(rng, 6)) {
      case 0:
        return proc_zero();
      case 1:
        return proc_ambient(pick_of(rng, ambients), proc(depth - 1));
      case 2: {
        std::vector<Process> comps;
        int k = 2 + pick(rng, 2);
        for (int i = 0; i < k; ++i) comps.push_back(proc(depth - 1));
        return proc_par(std::move(comps));
      }
      case 3: {
        SumFlavor flavor = chance(rng, 0.5) ? SumFlavor::Capability : SumFlavor::Communication;
        int k = 1 + pick(rng, 2);
        std::vector<Branch> branches;
        for (int i = 0; i < k; ++i) {
          std::vector<Name> binders;
          Prefix pre = random_prefix(flavor, binders);
          Process cont = proc(depth - 1);
          branches.push_back(Branch{std::move(pre), std::move(cont)});
        }
        return proc_sum(std::move(branches));
      }
      case 4:
        return proc_repl(proc(depth - 1));
      default: {
        Name binder{"nu" + std::to_string(fresh++),
                    NameKind::Ambient};
        ArgType annot = random_typeexpr(1);
        binder.kind = annot.name_kind();
        return proc_restrict(binder, annot, proc(depth - 1));
      }
    }
  }

  Model build() {
    declare_groups();
    declare_names();
    m.system = proc(4);
    return std::move(m);
  }
};

}  // namespace

Model random_model(Rng& rng) {
  SyntaxGen gen{rng};
  return gen.build();
}

// ---------------------------------------------------------------------------
// Random processes over a small namespace (hygiene/canonicalization tests)

namespace {

struct ProcGen {
  Rng& rng;
  int fresh = 0;

  Name name_of(const char* t, NameKind k) { return Name{t, k}; }

  Name some_name() {
    static const char* texts[] = {"a", "b", "c", "d", "h", "k", "n", "m", "x"};
    NameKind kinds[] = {NameKind::Ambient, NameKind::Ambient, NameKind::Channel,
                        NameKind::Channel, NameKind::Capability, NameKind::Capability,
                        NameKind::Ambient, NameKind::Ambient, NameKind::Channel};
    int i = pick(rng, 9);
    return Name{texts[i], kinds[i]};
  }

  ArgType some_annot() {
    if (chance(rng, 0.5)) return ArgType::group(GroupName{"G"});
    return ArgType::chan(ArgType::group(GroupName{"G"}));
  }

  Process gen(int depth) {
    if (depth <= 0 || chance(rng, 0.25)) return proc_zero();
    switch (pick(rng, 7)) {
      case 0:
        return proc_zero();
      case 1:
        return proc_ambient(Name{chance(rng, 0.5) ? "a" : "b", NameKind::Ambient},
                            gen(depth - 1));
      case 2: {
        std::vector<Process> comps;
        int k = 2 + pick(rng, 2);
        for (int i = 0; i < k; ++i) comps.push_back(gen(depth - 1));
        return proc_par(std::move(comps));
      }
      case 3: {
        bool cap = chance(rng, 0.5);
        int k = 1 + pick(rng, 2);
        std::vector<Branch> branches;
        for (int i = 0; i < k; ++i) {
          if (cap) {
            branches.push_back(Branch{
                CapPrefix{static_cast<CapOp>(pick(rng, 6)),
                          Name{chance(rng, 0.5) ? "h" : "k", NameKind::Capability}},
                gen(depth - 1)});
          } else if (chance(rng, 0.5)) {
            branches.push_back(Branch{OutputPrefix{static_cast<Direction>(pick(rng, 4)),
                                                   Name{"c", NameKind::Channel}, some_name()},
                                      gen(depth - 1)});
          } else {
            branches.push_back(Branch{InputPrefix{static_cast<Direction>(pick(rng, 4)),
                                                  Name{"c", NameKind::Channel}, some_name()},
                                      gen(depth - 1)});
          }
        }
        return proc_sum(std::move(branches));
      }
      case 4:
        return proc_repl(gen(depth - 1));
      case 5: {
        Name binder = some_name();
        ArgType annot = some_annot();
        return proc_restrict(binder, annot, gen(depth - 1));
      }
      default: {
        std::vector<Process> comps;
        comps.push_back(gen(depth - 1));
        comps.push_back(gen(depth - 1));
        return proc_par(std::move(comps));
      }
    }
  }
};

}  // namespace

Process random_process(Rng& rng, int depth) {
  ProcGen g{rng};
  return g.gen(depth);
}

// ---------------------------------------------------------------------------
// Congruence rewriting

namespace {

using Rebuild = std::function<Process(Process)>;
using Candidate = std::function<Process()>;

void gather(const Process& p, const Rebuild& rebuild, std::vector<Candidate>& out, Rng& rng) {
  // Wrapping any process position with | 0 is always available.
  out.push_back([p, rebuild] {
    std::vector<Process> wrapped{p, proc_zero()};
    return rebuild(make_process(ProcNode{ParN{std::move(wrapped)}}));
  });
  if (p.is_zero()) {
    out.push_back([rebuild] { return rebuild(proc_repl(proc_zero())); });  // 0 -> !0
    out.push_back([rebuild] {                                              // 0 -> (new z) 0
      return rebuild(
          proc_restrict(Name{"zz", NameKind::Ambient}, ArgType::group(GroupName{"G"}),
                        proc_zero()));
    });
    return;
  }
  if (const ReplN* r = p.as_repl()) {
    if (r->body.is_zero()) {
      out.push_back([rebuild] { return rebuild(proc_zero()); });  // !0 -> 0
    }
    Process body = r->body;
    gather(body, [rebuild, body](Process q) { return rebuild(proc_repl(q)); }, out, rng);
    return;
  }
  if (const ParN* par = p.as_par()) {
    std::vector<Process> comps = par->comps;
    if (comps.size() >= 2) {
      out.push_back([comps, rebuild, &rng]() mutable {  // commutativity
        for (std::size_t i = comps.size(); i > 1; --i)
          std::swap(comps[i - 1], comps[pick(rng, static_cast<int>(i))]);
        return rebuild(make_process(ProcNode{ParN{std::move(comps)}}));
      });
      out.push_back([comps, rebuild, &rng] {  // associativity: nest two comps
        std::size_t i = static_cast<std::size_t>(pick(rng, static_cast<int>(comps.size())));
        std::size_t j = static_cast<std::size_t>(pick(rng, static_cast<int>(comps.size() - 1)));
        if (j >= i) ++j;
        std::vector<Process> inner{comps[i], comps[j]};
        std::vector<Process> rest;
        for (std::size_t k = 0; k < comps.size(); ++k)
          if (k != i && k != j) rest.push_back(comps[k]);
        rest.push_back(make_process(ProcNode{ParN{std::move(inner)}}));
        return rebuild(make_process(ProcNode{ParN{std::move(rest)}}));
      });
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (comps[i].is_zero()) {
        out.push_back([comps, rebuild, i] {  // P|0 = P
          std::vector<Process> rest;
          for (std::size_t k = 0; k < comps.size(); ++k)
            if (k != i) rest.push_back(comps[k]);
          return rebuild(proc_par(std::move(rest)));
        });
      }
      if (comps[i].as_par()) {
        out.push_back([comps, rebuild, i] {  // flatten a nested par
          std::vector<Process> rest;
          for (std::size_t k = 0; k < comps.size(); ++k) {
            if (k == i) {
              for (const auto& c : comps[i].as_par()->comps) rest.push_back(c);
            } else {
              rest.push_back(comps[k]);
            }
          }
          return rebuild(make_process(ProcNode{ParN{std::move(rest)}}));
        });
      }
      if (const RestrictN* rn = comps[i].as_restrict()) {
        // pull a sibling inside the restriction when the binder is not free in it
        for (std::size_t j = 0; j < comps.size(); ++j) {
          if (j == i || free_names(comps[j]).count(rn->name)) continue;
          out.push_back([comps, rebuild, i, j] {
            const RestrictN* rn2 = comps[i].as_restrict();
            std::vector<Process> inner{comps[j], rn2->body};
            Process moved = proc_restrict(rn2->name, rn2->annot,
                                          make_process(ProcNode{ParN{std::move(inner)}}));
            std::vector<Process> rest;
            for (std::size_t k = 0; k < comps.size(); ++k) {
              if (k == j) continue;
              rest.push_back(k == i ? moved : comps[k]);
            }
            return rebuild(proc_par(std::move(rest)));
          });
          break;
        }
      }
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
      auto sub_rebuild = [comps, rebuild, i](Process q) {
        std::vector<Process> copy = comps;
        copy[i] = std::move(q);
        return rebuild(make_process(ProcNode{ParN{std::move(copy)}}));
      };
      gather(comps[i], sub_rebuild, out, rng);
    }
    return;
  }
  if (const AmbientN* amb = p.as_ambient()) {
    if (const RestrictN* rn = amb->body.as_restrict()) {
      if (rn->name.text != amb->name.text) {
        Name aname = amb->name;
        out.push_back([rn = *rn, aname, rebuild] {  // a[(new n)P] -> (new n)a[P]
          return rebuild(proc_restrict(rn.name, rn.annot, proc_ambient(aname, rn.body)));
        });
      }
    }
    Name aname = amb->name;
    Process body = amb->body;
    gather(body, [rebuild, aname](Process q) { return rebuild(proc_ambient(aname, q)); }, out,
           rng);
    return;
  }
  if (const RestrictN* rn = p.as_restrict()) {
    if (rn->body.is_zero()) {
      out.push_back([rebuild] { return rebuild(proc_zero()); });  // (new n)0 = 0
    }
    if (const RestrictN* inner = rn->body.as_restrict()) {
      if (inner->name.text != rn->name.text) {
        out.push_back([rn = *rn, inner = *inner, rebuild] {  // swap adjacent binders
          return rebuild(proc_restrict(inner.name, inner.annot,
                                       proc_restrict(rn.name, rn.annot, inner.body)));
        });
      }
    }
    if (const ParN* par = rn->body.as_par()) {
      for (std::size_t i = 0; i < par->comps.size(); ++i) {
        if (free_names(par->comps[i]).count(rn->name)) continue;
        out.push_back([rn = *rn, comps = par->comps, i, rebuild] {  // scope extrusion
          std::vector<Process> rest;
          for (std::size_t k = 0; k < comps.size(); ++k)
            if (k != i) rest.push_back(comps[k]);
          std::vector<Process> outer{comps[i],
                                     proc_restrict(rn.name, rn.annot, proc_par(std::move(rest)))};
          return rebuild(make_process(ProcNode{ParN{std::move(outer)}}));
        });
        break;
      }
    }
    if (const AmbientN* amb = rn->body.as_ambient()) {
      if (amb->name.text != rn->name.text) {
        out.push_back([rn = *rn, amb = *amb, rebuild] {  // (new n)a[P] -> a[(new n)P]
          return rebuild(proc_ambient(amb.name, proc_restrict(rn.name, rn.annot, amb.body)));
        });
      }
    }
    {
      NameSet avoid = all_names(rn->body);
      avoid.insert(rn->name);
      Name fresh = fresh_name(rn->name, avoid);
      out.push_back([rn = *rn, fresh, rebuild] {  // alpha-conversion
        return rebuild(proc_restrict(fresh, rn.annot, substitute(rn.body, rn.name, fresh)));
      });
    }
    Process body = rn->body;
    Name bname = rn->name;
    ArgType annot = rn->annot;
    gather(body,
           [rebuild, bname, annot](Process q) { return rebuild(proc_restrict(bname, annot, q)); },
           out, rng);
    return;
  }
  if (const SumN* sum = p.as_sum()) {
    for (std::size_t i = 0; i < sum->branches.size(); ++i) {
      if (auto* ip = std::get_if<InputPrefix>(&sum->branches[i].prefix)) {
        NameSet avoid = all_names(sum->branches[i].cont);
        avoid.insert(ip->binder);
        Name fresh = fresh_name(ip->binder, avoid);
        out.push_back([s = *sum, i, fresh, rebuild] {  // input-binder alpha-conversion
          auto branches = s.branches;
          auto* ip2 = std::get_if<InputPrefix>(&branches[i].prefix);
          Process cont = substitute(branches[i].cont, ip2->binder, fresh);
          branches[i] = Branch{InputPrefix{ip2->dir, ip2->channel, fresh}, std::move(cont)};
          return rebuild(proc_sum(std::move(branches)));
        });
      }
      auto branches = sum->branches;
      SumFlavor flavor = sum->flavor;
      auto sub_rebuild = [branches, flavor, rebuild, i](Process q) mutable {
        branches[i] = Branch{branches[i].prefix, std::move(q)};
        return rebuild(make_process(ProcNode{SumN{branches, flavor}}));
      };
      gather(sum->branches[i].cont, sub_rebuild, out, rng);
    }
    return;
  }
}

}  // namespace

std::optional<Process> random_congruence_rewrite(const Process& p, Rng& rng) {
  std::vector<Candidate> cands;
  gather(p, [](Process q) { return q; }, cands, rng);
  if (cands.empty()) return std::nullopt;
  return cands[pick(rng, static_cast<int>(cands.size()))]();
}

// ---------------------------------------------------------------------------
// Random well-typed models

namespace {

struct TypedGen {
  Rng& rng;

  struct AmbientSpec {
    Name name;
    GroupName group;
    std::vector<int> children;  // indices into `ambients`
    std::vector<Process> items;
    int parent = -1;
  };

  Model m;
  std::vector<GroupName> groups;
  std::vector<AmbientSpec> ambients;
  std::set<int> merge_donors;  // ambients carrying a merge-minus prefix
  int prefixes = 0;
  int next_cap = 0, next_chan = 0, next_payload = 0;

  GroupName random_group() { return pick_of(rng, groups); }

  void declare_groups() {
    int k = 1 + pick(rng, 3);
    for (int i = 0; i < k; ++i) groups.push_back(GroupName{"Ga" + std::to_string(i + 1)});
    for (const auto& g : groups) {
      GroupSet stay;
      if (chance(rng, 0.5)) stay.insert(univ_group());
      for (const auto& other : groups)
        if (chance(rng, 0.5)) stay.insert(other);
      if (stay.empty()) stay.insert(univ_group());
      GroupSet cross = stay;
      m.groups.declare(GroupDecl{g, stay, cross});
    }
  }

  // Tree of at most 4 ambients; chains up to depth 3 so exits can land in a
  // grandparent whose stay sets the exiting group may violate.
  void build_skeleton() {
    int roots = 1 + pick(rng, 3);
    for (int i = 0; i < roots; ++i) {
      AmbientSpec spec;
      spec.name = Name{"am" + std::to_string(i + 1), NameKind::Ambient};
      spec.group = random_group();
      ambients.push_back(spec);
    }
    while (static_cast<int>(ambients.size()) < 4 && chance(rng, 0.6)) {
      int parent = pick(rng, static_cast<int>(ambients.size()));
      AmbientSpec spec;
      spec.name = Name{"am" + std::to_string(ambients.size() + 1), NameKind::Ambient};
      spec.group = random_group();
      spec.parent = parent;
      ambients[parent].children.push_back(static_cast<int>(ambients.size()));
      ambients.push_back(spec);
    }
  }

  // A group whose members may stay in `host` but not in `other`, if any.
  std::optional<GroupName> trap_group(const GroupName& host, const GroupName& other) {
    for (const auto& gx : groups) {
      const GroupDecl& d = m.groups.lookup(gx);
      if (member_group(host, d.stay) && !member_group(other, d.stay)) return gx;
    }
    return std::nullopt;
  }

  Name declare_cap(Label l, GroupSet movers, GroupSet hosts) {
    Name n{"cp" + std::to_string(++next_cap), NameKind::Capability};
    m.env.extend(n, ArgType::cap(CapType{std::move(movers), std::move(hosts), l}));
    return n;
  }

  // Pairs of sibling indices (including -1 for the top level as parent).
  std::vector<std::pair<int, int>> sibling_pairs() {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < ambients.size(); ++i) {
      for (std::size_t j = 0; j < ambients.size(); ++j) {
        if (i != j && ambients[i].parent == ambients[j].parent)
          out.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
    return out;
  }

  void add_item(int amb, Process p) { ambients[amb].items.push_back(std::move(p)); }

  void maybe_repl(int amb) {
    if (!ambients[amb].items.empty() && chance(rng, 0.3)) {
      Process& last = ambients[amb].items.back();
      if (last.as_sum()) last = proc_repl(last);
    }
  }

  bool has_cap_items(int amb) const {
    for (const auto& item : ambients[amb].items) {
      const Process* p = &item;
      if (const ReplN* r = p->as_repl()) p = &r->body;
      if (const SumN* s = p->as_sum(); s && s->flavor == SumFlavor::Capability) return true;
    }
    return false;
  }

  // A merge moves the donor's whole body into the receiver, so any other
  // capability prefix beside the merge-minus would land in an ambient whose
  // group its type need not mention. Donor ambients therefore carry exactly
  // one capability prefix: the merge-minus itself (the runtime tests
  // characterize what happens outside this fragment).
  bool cap_ok(int amb) const { return !merge_donors.count(amb); }

  void add_enter_pair() {
    auto sibs = sibling_pairs();
    if (sibs.empty() || prefixes + 2 > 6) return;
    auto [i, j] = pick_of(rng, sibs);
    if (!cap_ok(i) || !cap_ok(j)) return;
    Name h = declare_cap(Label::EA, {ambients[i].group}, {ambients[j].group});
    add_item(i, proc_prefix(CapPrefix{CapOp::Enter, h}, proc_zero()));
    add_item(j, proc_prefix(CapPrefix{CapOp::Accept, h}, proc_zero()));
    prefixes += 2;
    maybe_repl(j);
  }

  void add_exit_pair() {
    if (prefixes + 2 > 6) return;
    std::vector<int> nested, deep;
    for (std::size_t i = 0; i < ambients.size(); ++i) {
      if (ambients[i].parent < 0) continue;
      nested.push_back(static_cast<int>(i));
      if (ambients[ambients[i].parent].parent >= 0) deep.push_back(static_cast<int>(i));
    }
    if (nested.empty()) return;
    // prefer exits whose destination is itself enclosed, which is where the
    // deferred stay check can actually fail
    int child = (!deep.empty() && chance(rng, 0.7)) ? pick_of(rng, deep) : pick_of(rng, nested);
    int parent = ambients[child].parent;
    if (!cap_ok(child) || !cap_ok(parent)) return;
    int grand = ambients[parent].parent;
    if (grand >= 0 && ambients[child].items.empty() && chance(rng, 0.5)) {
      // retarget the exiting group so the destination may reject it
      if (auto gx = trap_group(ambients[parent].group, ambients[grand].group))
        ambients[child].group = *gx;
    }
    Name h = declare_cap(Label::EE, {ambients[child].group}, {ambients[parent].group});
    add_item(child, proc_prefix(CapPrefix{CapOp::Exit, h}, proc_zero()));
    add_item(parent, proc_prefix(CapPrefix{CapOp::Expel, h}, proc_zero()));
    prefixes += 2;
    maybe_repl(parent);
  }

  void add_merge_pair() {
    auto sibs = sibling_pairs();
    if (sibs.empty() || prefixes + 2 > 6) return;
    // prefer donors with content, so merges move material whose groups the
    // receiver may reject
    std::vector<std::pair<int, int>> with_content;
    for (const auto& [i, j] : sibs)
      if (!ambients[j].children.empty()) with_content.emplace_back(i, j);
    auto [i, j] = (!with_content.empty() && chance(rng, 0.7)) ? pick_of(rng, with_content)
                                                              : pick_of(rng, sibs);
    if (!cap_ok(i) || !cap_ok(j) || has_cap_items(j)) return;
    if (chance(rng, 0.5)) {
      // retarget an inactive content child of the donor so the receiver may
      // reject the merged material
      for (int c : ambients[j].children) {
        if (!ambients[c].items.empty() || !ambients[c].children.empty() || !cap_ok(c)) continue;
        if (auto gx = trap_group(ambients[j].group, ambients[i].group)) {
          ambients[c].group = *gx;
          break;
        }
      }
    }
    Name h = declare_cap(Label::MM, {ambients[i].group}, {ambients[j].group});
    add_item(i, proc_prefix(CapPrefix{CapOp::MergePlus, h}, proc_zero()));
    add_item(j, proc_prefix(CapPrefix{CapOp::MergeMinus, h}, proc_zero()));
    merge_donors.insert(j);
    prefixes += 2;
  }

  void add_comm_pair() {
    if (prefixes + 2 > 6 || ambients.empty()) return;
    Name payload{"pl" + std::to_string(++next_payload), NameKind::Ambient};
    GroupName pg = random_group();
    m.env.extend(payload, ArgType::group(pg));
    Name chan{"chn" + std::to_string(++next_chan), NameKind::Channel};
    m.env.extend(chan, ArgType::chan(ArgType::group(pg)));
    int mode = pick(rng, 3);
    if (mode == 0) {  // local, within one ambient
      int i = pick(rng, static_cast<int>(ambients.size()));
      add_item(i, proc_prefix(OutputPrefix{Direction::Local, chan, payload}, proc_zero()));
      add_item(i, proc_prefix(
                      InputPrefix{Direction::Local, chan, Name{"w1", NameKind::Ambient}},
                      proc_zero()));
    } else if (mode == 1) {  // parent/child
      std::vector<int> nested;
      for (std::size_t i = 0; i < ambients.size(); ++i)
        if (ambients[i].parent >= 0) nested.push_back(static_cast<int>(i));
      if (nested.empty()) return;
      int child = pick_of(rng, nested);
      int parent = ambients[child].parent;
      if (chance(rng, 0.5)) {
        add_item(parent, proc_prefix(OutputPrefix{Direction::P2C, chan, payload}, proc_zero()));
        add_item(child, proc_prefix(
                            InputPrefix{Direction::C2P, chan, Name{"w2", NameKind::Ambient}},
                            proc_zero()));
      } else {
        add_item(child, proc_prefix(OutputPrefix{Direction::C2P, chan, payload}, proc_zero()));
        add_item(parent, proc_prefix(
                             InputPrefix{Direction::P2C, chan, Name{"w3", NameKind::Ambient}},
                             proc_zero()));
      }
    } else {  // siblings
      auto sibs = sibling_pairs();
      if (sibs.empty()) return;
      auto [i, j] = pick_of(rng, sibs);
      add_item(i, proc_prefix(OutputPrefix{Direction::S2S, chan, payload}, proc_zero()));
      add_item(j, proc_prefix(InputPrefix{Direction::S2S, chan, Name{"w4", NameKind::Ambient}},
                              proc_zero()));
    }
    prefixes += 2;
  }

  Process assemble(int idx) {
    std::vector<Process> comps = ambients[idx].items;
    for (int c : ambients[idx].children)
      comps.push_back(proc_ambient(ambients[c].name, assemble(c)));
    return proc_par(std::move(comps));
  }

  std::optional<Model> build() {
    declare_groups();
    build_skeleton();
    int interactions = 1 + pick(rng, 3);
    for (int i = 0; i < interactions; ++i) {
      switch (pick(rng, 4)) {
        case 0: add_enter_pair(); break;
        case 1: add_exit_pair(); break;
        case 2: add_merge_pair(); break;
        default: add_comm_pair(); break;
      }
    }
    // group retargeting settles before the names are declared
    for (const auto& a : ambients) m.env.extend(a.name, ArgType::group(a.group));
    std::vector<Process> top;
    for (std::size_t i = 0; i < ambients.size(); ++i) {
      if (ambients[i].parent < 0)
        top.push_back(proc_ambient(ambients[i].name, assemble(static_cast<int>(i))));
    }
    m.system = proc_par(std::move(top));
    if (!check_model(m).ok) return std::nullopt;
    return std::move(m);
  }
};

}  // namespace

namespace {

// A three-level chain whose innermost ambient exits into an environment that
// rejects it: reaches an exit error in one step.
Model exit_error_template(Rng& rng) {
  Model m;
  m.groups.declare({GroupName{"Ge1"}, {univ_group()}, {univ_group()}});
  m.groups.declare({GroupName{"Ge2"}, {GroupName{"Ge1"}}, {GroupName{"Ge1"}}});
  m.groups.declare({GroupName{"Ge3"}, {GroupName{"Ge2"}}, {GroupName{"Ge2"}}});
  Name outer{"am1", NameKind::Ambient}, mid{"am2", NameKind::Ambient},
      inner{"am3", NameKind::Ambient};
  m.env.extend(outer, ArgType::group(GroupName{"Ge1"}));
  m.env.extend(mid, ArgType::group(GroupName{"Ge2"}));
  m.env.extend(inner, ArgType::group(GroupName{"Ge3"}));
  Name h{"cp1", NameKind::Capability};
  m.env.extend(h, ArgType::cap(CapType{{GroupName{"Ge3"}}, {GroupName{"Ge2"}}, Label::EE}));
  std::vector<Process> mid_body{
      proc_ambient(inner, proc_prefix(CapPrefix{CapOp::Exit, h}, proc_zero())),
      proc_prefix(CapPrefix{CapOp::Expel, h}, proc_zero())};
  if (chance(rng, 0.5)) {
    Name chan{"chn1", NameKind::Channel};
    m.env.extend(chan, ArgType::chan(ArgType::group(GroupName{"Ge1"})));
    Name payload{"pl1", NameKind::Ambient};
    m.env.extend(payload, ArgType::group(GroupName{"Ge1"}));
    mid_body.push_back(proc_prefix(OutputPrefix{Direction::Local, chan, payload}, proc_zero()));
    mid_body.push_back(proc_prefix(
        InputPrefix{Direction::Local, chan, Name{"w1", NameKind::Ambient}}, proc_zero()));
  }
  m.system = proc_ambient(outer, proc_ambient(mid, proc_par(std::move(mid_body))));
  return m;
}

// Sibling merge whose donor carries content the receiver rejects: reaches a
// merge error in one step.
Model merge_error_template(Rng& rng) {
  Model m;
  m.groups.declare({GroupName{"Gm1"}, {univ_group()}, {univ_group()}});
  m.groups.declare({GroupName{"Gm2"}, {univ_group()}, {univ_group()}});
  m.groups.declare({GroupName{"Gm3"}, {GroupName{"Gm2"}}, {GroupName{"Gm2"}}});
  Name recv{"am1", NameKind::Ambient}, donor{"am2", NameKind::Ambient},
      content{"am3", NameKind::Ambient};
  m.env.extend(recv, ArgType::group(GroupName{"Gm1"}));
  m.env.extend(donor, ArgType::group(GroupName{"Gm2"}));
  m.env.extend(content, ArgType::group(GroupName{"Gm3"}));
  Name h{"cp1", NameKind::Capability};
  m.env.extend(h, ArgType::cap(CapType{{GroupName{"Gm1"}}, {GroupName{"Gm2"}}, Label::MM}));
  std::vector<Process> recv_body{proc_prefix(CapPrefix{CapOp::MergePlus, h}, proc_zero())};
  if (chance(rng, 0.5)) {
    Name extra{"am4", NameKind::Ambient};
    m.env.extend(extra, ArgType::group(GroupName{"Gm1"}));
    recv_body.push_back(proc_ambient(extra, proc_zero()));
  }
  Process merge_minus = proc_prefix(CapPrefix{CapOp::MergeMinus, h}, proc_zero());
  if (chance(rng, 0.4)) merge_minus = proc_repl(merge_minus);
  std::vector<Process> donor_body{merge_minus, proc_ambient(content, proc_zero())};
  std::vector<Process> top{proc_ambient(recv, proc_par(std::move(recv_body))),
                           proc_ambient(donor, proc_par(std::move(donor_body)))};
  m.system = proc_par(std::move(top));
  return m;
}

}  // namespace

Model random_typed_model(Rng& rng) {
  // Mix free-form generation with shapes that reach the two error verdicts,
  // so the suite exercises both halves of the progress statement.
  int mode = pick(rng, 6);
  if (mode == 0) {
    Model m = exit_error_template(rng);
    if (check_model(m).ok) return m;
  } else if (mode == 1) {
    Model m = merge_error_template(rng);
    if (check_model(m).ok) return m;
  }
  for (int attempt = 0; attempt < 500; ++attempt) {
    TypedGen gen{rng};
    if (auto m = gen.build()) return std::move(*m);
  }
  throw std::runtime_error("random_typed_model: no well-typed model after 500 attempts");
}

Model random_merge_model(Rng& rng) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    Model m;
    std::vector<GroupName> groups;
    int k = 2 + pick(rng, 2);
    for (int i = 0; i < k; ++i) groups.push_back(GroupName{"Gm" + std::to_string(i + 1)});
    for (const auto& g : groups) {
      GroupSet stay;
      if (chance(rng, 0.5)) stay.insert(univ_group());
      for (const auto& other : groups)
        if (chance(rng, 0.5)) stay.insert(other);
      if (stay.empty()) stay.insert(groups.front());
      m.groups.declare(GroupDecl{g, stay, stay});
    }
    GroupName ga = pick_of(rng, groups), gb = pick_of(rng, groups);
    Name a{"amA", NameKind::Ambient}, b{"amB", NameKind::Ambient};
    m.env.extend(a, ArgType::group(ga));
    m.env.extend(b, ArgType::group(gb));
    Name h{"hm", NameKind::Capability};
    m.env.extend(h, ArgType::cap(CapType{{ga}, {gb}, Label::MM}));

    auto content = [&](const std::string& base, int count) {
      std::vector<Process> out;
      for (int i = 0; i < count; ++i) {
        Name n{base + std::to_string(i + 1), NameKind::Ambient};
        m.env.extend(n, ArgType::group(pick_of(rng, groups)));
        out.push_back(proc_ambient(n, proc_zero()));
      }
      return out;
    };

    // a[ merge+ h . P | Q ] | b[ merge- h . R | S ]
    std::vector<Process> a_body = content("ca", pick(rng, 3));
    a_body.push_back(proc_prefix(CapPrefix{CapOp::MergePlus, h}, proc_zero()));
    std::vector<Process> b_body = content("cb", pick(rng, 3));
    Process r_cont = proc_zero();
    if (chance(rng, 0.5)) {
      Name rn{"cr1", NameKind::Ambient};
      m.env.extend(rn, ArgType::group(pick_of(rng, groups)));
      r_cont = proc_ambient(rn, proc_zero());
    } else if (chance(rng, 0.3)) {
      // a capability continued after the merge: decision-equivalent for the
      // group-based check, exercised here on purpose
      Name k2{"hk", NameKind::Capability};
      m.env.extend(k2, ArgType::cap(CapType{{gb}, {gb}, Label::MM}));
      r_cont = proc_prefix(CapPrefix{CapOp::MergeMinus, k2}, proc_zero());
    }
    b_body.push_back(proc_prefix(CapPrefix{CapOp::MergeMinus, h}, std::move(r_cont)));
    std::vector<Process> top;
    top.push_back(proc_ambient(a, proc_par(std::move(a_body))));
    top.push_back(proc_ambient(b, proc_par(std::move(b_body))));
    m.system = proc_par(std::move(top));
    if (check_model(m).ok) return m;
  }
  throw std::runtime_error("random_merge_model: no well-typed model after 500 attempts");
}

}  // namespace bioamb::testgen
