#include "bioamb/typing.hpp"

#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bioamb {

const char* type_error_kind_text(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::IllFormedCap: return "ill_formed_cap";
    case TypeErrorKind::StayViolation: return "stay_violation";
    case TypeErrorKind::IncompatCap: return "incompat_cap";
    case TypeErrorKind::PrefixMismatch: return "prefix_mismatch";
    case TypeErrorKind::ChannelMismatch: return "channel_mismatch";
    case TypeErrorKind::UnknownName: return "unknown_name";
    case TypeErrorKind::KindMismatch: return "kind_mismatch";
  }
  return "?";
}

std::string TypeError::to_string() const {
  std::ostringstream os;
  os << type_error_kind_text(kind) << ": " << subject;
  if (!context.empty()) os << " (" << context << ")";
  if (!path.empty()) {
    os << " at ";
    for (std::size_t i = 0; i < path.size(); ++i) os << (i ? "." : "") << path[i];
  }
  return os.str();
}

std::string cap_type_text(const CapType& y) {
  std::string movers, hosts;
  for (const auto& g : y.movers) movers += (movers.empty() ? "" : ",") + g.text;
  for (const auto& g : y.hosts) hosts += (hosts.empty() ? "" : ",") + g.text;
  return "({" + movers + "},{" + hosts + "})^" + label_text(y.label);
}

bool member_group(const GroupName& g, const GroupSet& s) {
  return s.count(g) > 0 || s.count(univ_group()) > 0;
}

WellFormed well_formed_cap(const CapType& y, const GroupTable& groups) {
  if (y.label == Label::MM) return {};
  for (const auto& host : y.hosts) {
    for (const auto& mover : y.movers) {
      if (!member_group(host, groups.lookup(mover).cross))
        return {false, std::make_pair(host, mover)};
    }
  }
  return {};
}

bool compatible(const CapType& y, const GroupName& g, const GroupTable& groups) {
  if (!well_formed_cap(y, groups).ok) return false;
  return y.movers.count(g) > 0 || y.hosts.count(g) > 0;
}

// ---------------------------------------------------------------------------
// type_process

namespace {

bool op_in_type(CapOp op, const CapType& y) { return cap_op_label(op) == y.label; }

struct Checker {
  const GroupTable& groups;

  TypingResult type(const TypeEnv& env, const Process& p, std::vector<std::size_t>& path) {
    return std::visit(
        [&](const auto& n) -> TypingResult {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ZeroN>) {
            return Judgment{};
          } else if constexpr (std::is_same_v<T, WarnN> || std::is_same_v<T, ExErrorN> ||
                               std::is_same_v<T, MergeErrorN>) {
            throw std::invalid_argument("type_process applied to a runtime form");
          } else if constexpr (std::is_same_v<T, RestrictN>) {
            return type_under_binder(env, n.name, n.annot, n.body, path);
          } else if constexpr (std::is_same_v<T, ParN>) {
            Judgment result;
            for (std::size_t i = 0; i < n.comps.size(); ++i) {
              path.push_back(i);
              auto r = type(env, n.comps[i], path);
              path.pop_back();
              if (auto* err = std::get_if<TypeError>(&r)) return *err;
              merge(result, std::get<Judgment>(r));
            }
            return result;
          } else if constexpr (std::is_same_v<T, ReplN>) {
            path.push_back(0);
            auto r = type(env, n.body, path);
            path.pop_back();
            return r;
          } else if constexpr (std::is_same_v<T, AmbientN>) {
            return type_ambient(env, n, path);
          } else {
            Judgment result;
            for (std::size_t i = 0; i < n.branches.size(); ++i) {
              path.push_back(i);
              auto r = type_branch(env, n.branches[i], path);
              path.pop_back();
              if (auto* err = std::get_if<TypeError>(&r)) return *err;
              merge(result, std::get<Judgment>(r));
            }
            return result;
          }
        },
        p.node().v);
  }

  static void merge(Judgment& into, const Judgment& j) {
    into.groups.insert(j.groups.begin(), j.groups.end());
    into.caps.insert(j.caps.begin(), j.caps.end());
  }

  TypeError err(TypeErrorKind kind, std::string subject, std::string context,
                const std::vector<std::size_t>& path) const {
    return TypeError{kind, std::move(subject), std::move(context), path};
  }

  // Extends the environment with a binder, alpha-renaming it when the name is
  // already bound in Gamma. Returns the environment and the body to type.
  TypingResult type_under_binder(const TypeEnv& env, const Name& binder, const ArgType& t,
                                 const Process& body, std::vector<std::size_t>& path) {
    Name use = binder;
    Process inner = body;
    if (env.contains(binder.text)) {
      NameSet avoid = env.domain();
      NameSet occurring = all_names(body);
      avoid.insert(occurring.begin(), occurring.end());
      use = fresh_name(binder, avoid);
      inner = substitute(body, binder, use);
    }
    TypeEnv extended = env.extended(use, t);
    path.push_back(0);
    auto r = type(extended, inner, path);
    path.pop_back();
    return r;
  }

  TypingResult type_ambient(const TypeEnv& env, const AmbientN& n,
                            std::vector<std::size_t>& path) {
    const ArgType* at = env.lookup(n.name);
    if (!at) return err(TypeErrorKind::UnknownName, n.name.text, "ambient name", path);
    const GroupName* g = at->as_group();
    if (!g)
      return err(TypeErrorKind::KindMismatch, n.name.text,
                 "ambient position needs a name of an amb(G) type", path);
    path.push_back(0);
    auto r = type(env, n.body, path);
    path.pop_back();
    if (auto* e = std::get_if<TypeError>(&r)) return *e;
    const Judgment& body = std::get<Judgment>(r);
    // Every content group must admit this host; checked before capability
    // compatibility so a stay violation is never shadowed.
    for (const auto& gk : body.groups) {
      if (!member_group(*g, groups.lookup(gk).stay))
        return err(TypeErrorKind::StayViolation, n.name.text, gk.text, path);
    }
    for (const auto& y : body.caps) {
      if (!compatible(y, *g, groups))
        return err(TypeErrorKind::IncompatCap, cap_type_text(y), g->text, path);
    }
    return Judgment{{*g}, {}};
  }

  TypingResult type_branch(const TypeEnv& env, const Branch& b,
                           std::vector<std::size_t>& path) {
    if (auto* cp = std::get_if<CapPrefix>(&b.prefix)) {
      const ArgType* t = env.lookup(cp->name);
      if (!t) return err(TypeErrorKind::UnknownName, cp->name.text, "capability name", path);
      const CapType* y = t->as_cap();
      if (!y)
        return err(TypeErrorKind::KindMismatch, cp->name.text,
                   std::string("'") + cap_op_text(cp->op) + "' needs a capability name", path);
      auto wf = well_formed_cap(*y, groups);
      if (!wf.ok)
        return err(TypeErrorKind::IllFormedCap, cp->name.text,
                   wf.witness->first.text + " not crossable by " + wf.witness->second.text, path);
      if (!op_in_type(cp->op, *y))
        return err(TypeErrorKind::PrefixMismatch, cp->name.text,
                   std::string(cap_op_text(cp->op)) + " does not belong to " + cap_type_text(*y),
                   path);
      auto r = type(env, b.cont, path);
      if (auto* e = std::get_if<TypeError>(&r)) return *e;
      Judgment j = std::get<Judgment>(r);
      j.caps.insert(*y);
      return j;
    }
    if (auto* op = std::get_if<OutputPrefix>(&b.prefix)) {
      const ArgType* ct = env.lookup(op->channel);
      if (!ct) return err(TypeErrorKind::UnknownName, op->channel.text, "channel name", path);
      const ChanType* w = ct->as_chan();
      if (!w)
        return err(TypeErrorKind::ChannelMismatch, op->channel.text,
                   "output subject is not a channel", path);
      const ArgType* pt = env.lookup(op->payload);
      if (!pt) return err(TypeErrorKind::UnknownName, op->payload.text, "message name", path);
      if (!(*pt == *w->payload))
        return err(TypeErrorKind::ChannelMismatch, op->payload.text,
                   "message type does not match channel payload type", path);
      return type(env, b.cont, path);
    }
    auto* ip = std::get_if<InputPrefix>(&b.prefix);
    const ArgType* ct = env.lookup(ip->channel);
    if (!ct) return err(TypeErrorKind::UnknownName, ip->channel.text, "channel name", path);
    const ChanType* w = ct->as_chan();
    if (!w)
      return err(TypeErrorKind::ChannelMismatch, ip->channel.text,
                 "input subject is not a channel", path);
    return type_under_binder(env, ip->binder, *w->payload, b.cont, path);
  }
};

// Collects every capability type nested anywhere in an argument type.
void collect_cap_types(const ArgType& t, std::vector<CapType>& out) {
  if (auto* y = t.as_cap()) {
    out.push_back(*y);
  } else if (auto* w = t.as_chan()) {
    collect_cap_types(*w->payload, out);
  }
}

void collect_groups(const ArgType& t, GroupSet& out) {
  if (auto* g = t.as_group()) {
    out.insert(*g);
  } else if (auto* y = t.as_cap()) {
    out.insert(y->movers.begin(), y->movers.end());
    out.insert(y->hosts.begin(), y->hosts.end());
  } else if (auto* w = t.as_chan()) {
    collect_groups(*w->payload, out);
  }
}

}  // namespace

TypingResult type_process(const TypeEnv& env, const GroupTable& groups, const Process& p) {
  Checker c{groups};
  std::vector<std::size_t> path;
  return c.type(env, p, path);
}

CheckReport check_model(const Model& m) {
  CheckReport report;
  // Declaration-level checks: cross included in stay, and every group
  // reference resolvable.
  for (const auto& d : m.groups.decls()) {
    for (const auto& c : d.cross) {
      if (!member_group(c, d.stay)) {
        report.errors.push_back(TypeError{TypeErrorKind::StayViolation, d.name.text,
                                          "cross group " + c.text + " not in stay set", {}});
      }
    }
    GroupSet referenced = d.stay;
    referenced.insert(d.cross.begin(), d.cross.end());
    for (const auto& g : referenced) {
      if (!m.groups.declared(g))
        report.errors.push_back(
            TypeError{TypeErrorKind::UnknownName, d.name.text, "group " + g.text, {}});
    }
  }
  // Environment well-formedness: every capability type reachable in Gamma
  // must be well formed, and every referenced group declared.
  for (const auto& [n, t] : m.env.entries()) {
    GroupSet referenced;
    collect_groups(t, referenced);
    for (const auto& g : referenced) {
      if (!m.groups.declared(g))
        report.errors.push_back(
            TypeError{TypeErrorKind::UnknownName, n.text, "group " + g.text, {}});
    }
    std::vector<CapType> caps;
    collect_cap_types(t, caps);
    for (const auto& y : caps) {
      auto wf = well_formed_cap(y, m.groups);
      if (!wf.ok) {
        report.errors.push_back(TypeError{
            TypeErrorKind::IllFormedCap, n.text,
            "witness (" + wf.witness->first.text + ", " + wf.witness->second.text + ")",
            {}});
      }
    }
  }
  if (!report.errors.empty()) return report;
  auto r = type_process(m.env, m.groups, m.system);
  if (auto* e = std::get_if<TypeError>(&r)) {
    report.errors.push_back(*e);
    return report;
  }
  report.ok = true;
  report.judgment = std::get<Judgment>(r);
  return report;
}

std::string CheckReport::to_json() const {
  nlohmann::json j;
  j["status"] = ok ? "ok" : "error";
  j["groups"] = nlohmann::json::array();
  j["deltas"] = nlohmann::json::array();
  if (ok) {
    for (const auto& g : judgment.groups) j["groups"].push_back(g.text);
    for (const auto& y : judgment.caps) {
      nlohmann::json cap;
      cap["label"] = label_text(y.label);
      cap["movers"] = nlohmann::json::array();
      for (const auto& g : y.movers) cap["movers"].push_back(g.text);
      cap["hosts"] = nlohmann::json::array();
      for (const auto& g : y.hosts) cap["hosts"].push_back(g.text);
      j["deltas"].push_back(cap);
    }
  }
  j["errors"] = nlohmann::json::array();
  for (const auto& e : errors) {
    nlohmann::json je;
    je["kind"] = type_error_kind_text(e.kind);
    je["subject"] = e.subject;
    je["context"] = e.context;
    je["path"] = e.path;
    j["errors"].push_back(je);
  }
  return j.dump(2);
}

}  // namespace bioamb
