#ifndef BIOAMB_TYPING_ENV_HPP
#define BIOAMB_TYPING_ENV_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bioamb/ast.hpp"

namespace bioamb {

// The environment Gamma: an ordered map from names to argument types. A name
// may be bound at most once; extend() refuses duplicates.
class TypeEnv {
 public:
  bool extend(Name n, ArgType t);  // false if n already bound
  bool contains(const std::string& text) const { return index_.count(text) > 0; }
  const ArgType* lookup(const std::string& text) const;
  const ArgType* lookup(const Name& n) const { return lookup(n.text); }

  const std::vector<std::pair<Name, ArgType>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  NameSet domain() const;

  // Extended copy; the caller guarantees n is not yet bound.
  TypeEnv extended(Name n, ArgType t) const;

 private:
  std::vector<std::pair<Name, ArgType>> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace bioamb

#endif  // BIOAMB_TYPING_ENV_HPP
