#include "bioamb/typing_env.hpp"

namespace bioamb {

bool TypeEnv::extend(Name n, ArgType t) {
  if (index_.count(n.text)) return false;
  index_.emplace(n.text, entries_.size());
  entries_.emplace_back(std::move(n), std::move(t));
  return true;
}

const ArgType* TypeEnv::lookup(const std::string& text) const {
  auto it = index_.find(text);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

NameSet TypeEnv::domain() const {
  NameSet out;
  for (const auto& [n, t] : entries_) out.insert(n);
  return out;
}

TypeEnv TypeEnv::extended(Name n, ArgType t) const {
  TypeEnv copy = *this;
  copy.extend(std::move(n), std::move(t));
  return copy;
}

}  // namespace bioamb
