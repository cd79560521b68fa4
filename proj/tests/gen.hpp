#ifndef BIOAMB_TESTS_GEN_HPP
#define BIOAMB_TESTS_GEN_HPP

#include <optional>
#include <random>
#include <string>

#include "bioamb/ast.hpp"
#include "bioamb/parser.hpp"

// Test data generators: random syntactic models for parser round-trips,
// random well-typed models for the subject-reduction suite, random processes
// for name-hygiene properties, and single-axiom congruence rewriters.

namespace bioamb::testgen {

using Rng = std::mt19937_64;

std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);
Model load_fixture(const std::string& name);  // throws on parse failure

// Arbitrary parseable, runtime-free model. Names are declared for everything
// used; typing may or may not hold.
Model random_model(Rng& rng);

// Well-typed model within the subject-reduction suite limits: at most 4
// ambient nodes, 3 declared groups and 6 prefixes, capabilities used in
// their declared roles, and merge-incoming content free of bare capability
// prefixes. Generation retries until check_model accepts.
Model random_typed_model(Rng& rng);

// Random process over a small fixed namespace, including binders; used for
// substitution/free-name/canonicalization properties.
Process random_process(Rng& rng, int depth = 3);

// Applies one randomly chosen structural-congruence axiom instance (any
// direction, excluding replication unfolding). nullopt when no axiom applies.
std::optional<Process> random_congruence_rewrite(const Process& p, Rng& rng);

// Two-ambient merge configuration for the merge-oracle suite: a[ merge+ h...]
// | b[ merge- h... ] with assorted content, well-typed by construction
// (retries until check_model accepts).
Model random_merge_model(Rng& rng);

}  // namespace bioamb::testgen

#endif  // BIOAMB_TESTS_GEN_HPP
