#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "ose/ontology.hpp"

namespace ose {

struct Term {
  enum class Kind { Variable, Constant };

  Kind kind = Kind::Variable;
  std::string name;  // variable name without '?', or the constant itself

  static Term var(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Term constant(std::string c) { return {Kind::Constant, std::move(c)}; }
  bool is_var() const { return kind == Kind::Variable; }

  auto operator<=>(const Term&) const = default;
};

/// C(t) for a named class, or P(t1, t2) for an object or data property.
struct Atom {
  enum class Kind { Class, Property };

  Kind kind = Kind::Class;
  std::string predicate;
  std::vector<Term> args;

  static Atom cls(std::string c, Term t) { return {Kind::Class, std::move(c), {std::move(t)}}; }
  static Atom property(std::string p, Term s, Term o) {
    return {Kind::Property, std::move(p), {std::move(s), std::move(o)}};
  }

  auto operator<=>(const Atom&) const = default;
};

/// q(head) <- atoms. Head entries start as variables; unification during
/// rewriting may bind them to constants.
struct ConjunctiveQuery {
  std::vector<Term> head;
  std::vector<Atom> atoms;

  auto operator<=>(const ConjunctiveQuery&) const = default;
};

struct UnionOfCQs {
  std::vector<ConjunctiveQuery> disjuncts;

  std::size_t arity() const { return disjuncts.empty() ? 0 : disjuncts.front().head.size(); }
};

/// Parses `SELECT [DISTINCT] ?v.. WHERE { s p o . ... }` where each triple is
/// `?x a Class` or `subj prop obj`, subjects and objects being `?var`,
/// individual names, or (for data properties) `"literal"` objects.
/// Throws SyntaxError, or Error with UndeclaredName / UnboundHeadVariable.
ConjunctiveQuery parse_cq(std::string_view text, const Ontology& o);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
/// `q(?x) <- B(?x), p(?x, ?y)`
std::string to_string(const ConjunctiveQuery& q);
std::string to_string(const UnionOfCQs& u);

}  // namespace ose
