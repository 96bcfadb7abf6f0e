#pragma once

#include <cstddef>
#include <span>

#include "ose/datastore.hpp"
#include "ose/ontology.hpp"
#include "ose/query.hpp"

namespace ose {

/// PerfectRef-style rewriting: atoms are rewritten right-to-left through the
/// positive inclusions of the TBox and pairs of unifiable atoms are reduced,
/// until no new query appears up to variable renaming. Evaluating the result
/// over the raw ABox yields the certain answers of `q`.
///
/// Throws Error(NonQLAxiomEncountered) when `o` has axioms outside the QL
/// fragment, ConditionalType included; strip those with ql_fragment first.
UnionOfCQs perfect_rewrite(const ConjunctiveQuery& q, const Ontology& o);

/// Renames non-head variables into `v0, v1, ...` in the atom order that gives
/// the smallest result; identical queries up to renaming and atom order map
/// to the same form (exhaustively up to six atoms, heuristically beyond).
ConjunctiveQuery canonicalize(const ConjunctiveQuery& q);

/// One SELECT DISTINCT block per disjunct joined by UNION, aliases t0..tn per
/// block. Throws Error(UnmappedSymbol).
SqlText compile_to_sql(const UnionOfCQs& u, const Mapping& m);

/// execute(compile_to_sql(perfect_rewrite(q, o), store.mapping())).
ResultSet certain_answers(const ConjunctiveQuery& q, const Ontology& o, const DataStore& store);

/// Direct evaluation of `q` over a set of assertions, with no reasoning.
ResultSet evaluate_cq(const ConjunctiveQuery& q, std::span<const Assertion> facts);

inline constexpr std::size_t kChaseAboxLimit = 10000;

/// Certain answers computed independently of rewriting: the ABox is chased
/// under the TBox with labeled nulls for existentials up to depth
/// |q.atoms| + 1 below each named individual, plus one detached witness tree
/// per role that some element can be forced to have (covering query parts
/// that mention no answer variable and no constant). Tuples containing
/// nulls are discarded. Throws Error(InstanceTooLarge) above kChaseAboxLimit.
ResultSet chase_oracle(const ConjunctiveQuery& q, const Ontology& o);

}  // namespace ose
